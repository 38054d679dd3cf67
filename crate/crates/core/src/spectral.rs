//! Periodic 1D/2D grids and Fourier-multiplier machinery.
//!
//! Conventions:
//! - Real-space nodes are `x_i = -L_x/2 + i·Δx`, `i = 0..N_x` (likewise in y),
//!   stored row-major with x fastest: `index = iy·N_x + ix`.
//! - The forward transform is the unnormalized sum `f̂_j = Σ_i f_i e^{-i k_j x_i'}`
//!   (phases relative to the first node); the inverse carries `1/(N_x N_y)`.
//! - k-space storage uses the standard FFT ordering: slot `j < N/2` holds
//!   `k = 2πj/L`, slot `j ≥ N/2` holds `k = 2π(j − N)/L`, so the lattice is
//!   `{−N/2, …, N/2 − 1}·2π/L`. The Nyquist mode is treated like any other.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, C64};

/// Which representation a [`SpectralField`] currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Real,
    Fourier,
}

/// Periodic lattice. For `dim == 1`, `ny == 1` and `ly` is unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn new_1d(n: usize, length: f64) -> Result<Self> {
        check_axis(n, length)?;
        Ok(Grid {
            dim: 1,
            nx: n,
            ny: 1,
            lx: length,
            ly: 1.0,
        })
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        check_axis(nx, lx)?;
        check_axis(ny, ly)?;
        Ok(Grid { dim: 2, nx, ny, lx, ly })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        if self.dim == 1 {
            1.0
        } else {
            self.ly / self.ny as f64
        }
    }

    /// Volume element of one node: Δx in 1D, Δx·Δy in 2D.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Total domain measure: L_x in 1D, L_x·L_y in 2D.
    pub fn domain_area(&self) -> f64 {
        if self.dim == 1 {
            self.lx
        } else {
            self.lx * self.ly
        }
    }

    pub fn x(&self, ix: usize) -> f64 {
        -0.5 * self.lx + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        if self.dim == 1 {
            0.0
        } else {
            -0.5 * self.ly + iy as f64 * self.dy()
        }
    }

    /// Real-space coordinates of node `idx`.
    pub fn position(&self, idx: usize) -> [f64; 2] {
        [self.x(idx % self.nx), self.y(idx / self.nx)]
    }

    /// Signed lattice mode number of storage slot `j` on an axis of `n` points.
    pub fn mode_number(j: usize, n: usize) -> i64 {
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    pub fn kx(&self, jx: usize) -> f64 {
        2.0 * PI * Self::mode_number(jx, self.nx) as f64 / self.lx
    }

    pub fn ky(&self, jy: usize) -> f64 {
        if self.dim == 1 {
            0.0
        } else {
            2.0 * PI * Self::mode_number(jy, self.ny) as f64 / self.ly
        }
    }

    /// Wavevector of k-space storage slot `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        [self.kx(idx % self.nx), self.ky(idx / self.nx)]
    }

    /// `|k|` for every k-space slot, in storage order.
    pub fn k_abs(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let [kx, ky] = self.wavevector(i);
                kx.hypot(ky)
            })
            .collect()
    }

    /// Largest `|k|` on the lattice (the corner Nyquist mode in 2D).
    pub fn k_max(&self) -> f64 {
        let kx = PI * self.nx as f64 / self.lx;
        if self.dim == 1 {
            kx
        } else {
            kx.hypot(PI * self.ny as f64 / self.ly)
        }
    }

    /// Storage slot of the lattice mode `(mx, my)`, mode numbers in `[−N/2, N/2)`.
    pub fn mode_index(&self, mx: i64, my: i64) -> usize {
        let wrap = |m: i64, n: usize| m.rem_euclid(n as i64) as usize;
        wrap(my, self.ny) * self.nx + wrap(mx, self.nx)
    }
}

fn check_axis(n: usize, length: f64) -> Result<()> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "grid size {n} must be even and at least 8"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid extent {length} must be positive"
        )));
    }
    Ok(())
}

/// Complex samples on a [`Grid`] tagged with their representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub values: Vec<C64>,
    pub space: Space,
}

impl SpectralField {
    pub fn new(grid: Grid, values: Vec<C64>, space: Space) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, values, space })
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        SpectralField {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
            space,
        }
    }

    /// Real-space field sampled from `f(x, y)`.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.position(i);
                f(x, y)
            })
            .collect();
        SpectralField {
            grid,
            values,
            space: Space::Real,
        }
    }

    /// On-lattice plane wave `e^{i k·r}` with `k = 2π(mx/L_x, my/L_y)`.
    pub fn plane_wave(grid: Grid, mx: i64, my: i64) -> Self {
        let kx = 2.0 * PI * mx as f64 / grid.lx();
        let ky = if grid.dim() == 1 {
            0.0
        } else {
            2.0 * PI * my as f64 / grid.ly()
        };
        Self::from_fn(grid, |x, y| C64::from_polar(1.0, kx * x + ky * y))
    }

    pub fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::WrongSpace {
                expected,
                found: self.space,
            })
        }
    }
}

/// Discrete L² inner product `Σ conj(a_i) b_i · ΔA` of two real-space sample vectors.
pub fn inner_product(a: &[C64], b: &[C64], cell_area: f64) -> C64 {
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum::<C64>() * cell_area
}

/// Cached FFT plans for one grid.
#[derive(Clone)]
pub struct SpectralPlan {
    grid: Grid,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Option<Arc<dyn Fft<f64>>>,
    inv_y: Option<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("grid", &self.grid).finish()
    }
}

/// Rows handed to one rayon task.
const ROWS_PER_TASK: usize = 16;

impl SpectralPlan {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(grid.nx());
        let inv_x = planner.plan_fft_inverse(grid.nx());
        let (fwd_y, inv_y) = if grid.dim() == 2 {
            (
                Some(planner.plan_fft_forward(grid.ny())),
                Some(planner.plan_fft_inverse(grid.ny())),
            )
        } else {
            (None, None)
        };
        SpectralPlan {
            grid,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Unnormalized forward transform of raw samples, in place.
    pub fn forward_in_place(&self, data: &mut [C64]) {
        self.transform(data, &self.fwd_x, self.fwd_y.as_ref());
    }

    /// Inverse transform including the `1/(N_x N_y)` factor, in place.
    pub fn inverse_in_place(&self, data: &mut [C64]) {
        self.inverse_unscaled_in_place(data);
        let scale = 1.0 / self.grid.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    /// Inverse transform without normalization, for callers that fold `1/N`
    /// into a multiplier table.
    pub fn inverse_unscaled_in_place(&self, data: &mut [C64]) {
        self.transform(data, &self.inv_x, self.inv_y.as_ref());
    }

    fn transform(&self, data: &mut [C64], along_x: &Arc<dyn Fft<f64>>, along_y: Option<&Arc<dyn Fft<f64>>>) {
        assert_eq!(data.len(), self.grid.len(), "buffer does not match grid");
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        batched(data, nx, along_x);
        if let Some(fy) = along_y {
            let mut cols = vec![C64::new(0.0, 0.0); data.len()];
            transpose(data, &mut cols, nx, ny);
            batched(&mut cols, ny, fy);
            transpose(&cols, data, ny, nx);
        }
    }

    pub fn forward(&self, field: &SpectralField) -> Result<SpectralField> {
        field.expect_space(Space::Real)?;
        self.check_grid(&field.grid)?;
        let mut values = field.values.clone();
        self.forward_in_place(&mut values);
        Ok(SpectralField {
            grid: field.grid,
            values,
            space: Space::Fourier,
        })
    }

    pub fn inverse(&self, field: &SpectralField) -> Result<SpectralField> {
        field.expect_space(Space::Fourier)?;
        self.check_grid(&field.grid)?;
        let mut values = field.values.clone();
        self.inverse_in_place(&mut values);
        Ok(SpectralField {
            grid: field.grid,
            values,
            space: Space::Real,
        })
    }

    /// `F⁻¹(table · F f)` for a per-slot table in k-space storage order.
    pub fn apply_table(&self, field: &SpectralField, table: &[f64]) -> Result<SpectralField> {
        field.expect_space(Space::Real)?;
        self.check_grid(&field.grid)?;
        if table.len() != self.grid.len() {
            return Err(Error::GridMismatch("multiplier table length".into()));
        }
        let mut values = field.values.clone();
        self.forward_in_place(&mut values);
        let scale = 1.0 / self.grid.len() as f64;
        values
            .par_iter_mut()
            .zip(table.par_iter())
            .for_each(|(v, &m)| *v *= m * scale);
        self.inverse_unscaled_in_place(&mut values);
        Ok(SpectralField {
            grid: field.grid,
            values,
            space: Space::Real,
        })
    }

    /// `F⁻¹(K(|k|) · F f)` for a radial symbol `K`.
    pub fn apply_multiplier(
        &self,
        field: &SpectralField,
        symbol: impl Fn(f64) -> Result<f64>,
    ) -> Result<SpectralField> {
        let table = multiplier_table(&self.grid, symbol)?;
        self.apply_table(field, &table)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if *grid == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch("field grid differs from plan grid".into()))
        }
    }
}

/// Evaluates a radial symbol at every lattice `|k|` (k-space storage order).
pub fn multiplier_table(grid: &Grid, symbol: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    grid.k_abs().into_iter().map(symbol).collect()
}

fn batched(data: &mut [C64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// `dst[c·rows + r] = src[r·cols + c]` for a `rows × cols` source.
fn transpose(src: &[C64], dst: &mut [C64], cols: usize, rows: usize) {
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, v) in out.iter_mut().enumerate() {
            *v = src[r * cols + c];
        }
    });
}

/// Forward transform with a freshly built plan.
pub fn forward(field: &SpectralField) -> Result<SpectralField> {
    SpectralPlan::new(field.grid).forward(field)
}

/// Inverse transform with a freshly built plan.
pub fn inverse(field: &SpectralField) -> Result<SpectralField> {
    SpectralPlan::new(field.grid).inverse(field)
}

/// Applies the radial Fourier multiplier `symbol(|k|)` to a real-space field.
pub fn apply_multiplier(field: &SpectralField, symbol: impl Fn(f64) -> Result<f64>) -> Result<SpectralField> {
    SpectralPlan::new(field.grid).apply_multiplier(field, symbol)
}

/// Fractional Laplacian `(−Δ)^s`, symbol `|k|^{2s}`, for `0 < s ≤ 1`.
pub fn fractional_laplacian(field: &SpectralField, s: f64) -> Result<SpectralField> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional order s = {s} outside (0, 1]"
        )));
    }
    apply_multiplier(field, |k| Ok(if k == 0.0 { 0.0 } else { k.powf(2.0 * s) }))
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"PFQM";
pub const SNAPSHOT_VERSION: u16 = 1;

/// Writes a real-space field in the PFQM snapshot format:
///
/// | bytes | content |
/// |---|---|
/// | 4 | magic `PFQM` |
/// | 2 | version (u16, currently 1) |
/// | 4 | dim (u32) |
/// | 4, 4 | N_x, N_y (u32) |
/// | 8, 8 | L_x, L_y (f64) |
/// | 8 | time t (f64, ps) |
/// | 16·N_x·N_y | interleaved (re, im) f64 pairs, row-major, x fastest |
///
/// All little-endian.
pub fn write_snapshot(mut w: impl Write, field: &SpectralField, time: f64) -> Result<()> {
    field.expect_space(Space::Real)?;
    let g = &field.grid;
    let mut buf = Vec::with_capacity(42 + 16 * g.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    for v in [g.dim(), g.nx(), g.ny()] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in [g.lx(), g.ly(), time] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for z in &field.values {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a PFQM snapshot, returning the field and its time stamp.
pub fn read_snapshot(mut r: impl Read) -> Result<(SpectralField, f64)> {
    let mut header = [0u8; 42];
    r.read_exact(&mut header)?;
    if &header[0..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let (dim, nx, ny) = (u32_at(6), u32_at(10), u32_at(14));
    let (lx, ly, time) = (f64_at(18), f64_at(26), f64_at(34));
    let grid = match dim {
        1 if ny == 1 => Grid::new_1d(nx, lx)?,
        2 => Grid::new_2d(nx, ny, lx, ly)?,
        _ => return Err(Error::Format(format!("bad dimension header {dim} ({nx}×{ny})"))),
    };
    let mut raw = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok((SpectralField::new(grid, values, Space::Real)?, time))
}
