//! Grayscale PNG rendering of real maps.

use std::path::Path;

use image::{GrayImage, Luma};

use crate::CliError;

/// Writes a row-major map (x fastest) as an 8-bit grayscale PNG scaled to
/// its finite range, with the first row at the bottom. Non-finite values
/// are drawn black.
pub fn write_png(values: &[f64], nx: usize, ny: usize, path: &Path) -> Result<(), CliError> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let img = GrayImage::from_fn(nx as u32, ny as u32, |x, y| {
        let v = values[(ny - 1 - y as usize) * nx + x as usize];
        let level = if v.is_finite() {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            0
        };
        Luma([level])
    });
    img.save(path).map_err(|e| CliError::Io(std::io::Error::other(e)))
}
