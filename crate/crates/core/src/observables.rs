//! Diagnostics extracted from condensate fields.

use std::f64::consts::PI;
use std::io::Write;

use crate::dynamics::{Integrator, IntegratorOptions, ModelParams, SimState};
use crate::spectral::{Grid, SpectralField};
use crate::{Error, Result, C64};

/// Named real channels sampled at strictly increasing times (ps).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[c][i]` is channel `c` at `times[i]`.
    pub values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: &[&str]) -> Self {
        TimeSeries {
            times: Vec::new(),
            names: names.iter().map(|s| s.to_string()).collect(),
            values: vec![Vec::new(); names.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, row: &[f64]) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} values for {} channels",
                row.len(),
                self.names.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidParameter(format!(
                    "time {t} does not increase past {last}"
                )));
            }
        }
        self.times.push(t);
        for (col, v) in self.values.iter_mut().zip(row) {
            col.push(*v);
        }
        Ok(())
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i].as_slice())
    }

    /// CSV with a `t` column followed by one column per channel.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        write!(w, "t")?;
        for n in &self.names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t:.9e}")?;
            for col in &self.values {
                write!(w, ",{:.12e}", col[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `M = Σ|ψ|² ΔA`.
pub fn total_mass(field: &SpectralField) -> f64 {
    total_mass_values(&field.values, &field.grid)
}

pub fn total_mass_values(values: &[C64], grid: &Grid) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_area()
}

pub fn max_abs(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Density `|ψ|²` and phase `arg ψ ∈ (−π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPhase {
    pub density: Vec<f64>,
    pub phase: Vec<f64>,
    /// False where the density is below 1e-12 of its maximum, so the phase
    /// carries no information.
    pub phase_defined: Vec<bool>,
}

pub fn density_phase(field: &SpectralField) -> Result<DensityPhase> {
    field.expect_space(crate::spectral::Space::Real)?;
    let density: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    let cutoff = 1e-12 * density.iter().cloned().fold(0.0, f64::max);
    let phase = field
        .values
        .iter()
        .map(|v| {
            let a = v.arg();
            // atan2 yields [−π, π]; fold −π onto π
            if a == -PI {
                PI
            } else {
                a
            }
        })
        .collect();
    let phase_defined = density.iter().map(|&d| d > cutoff).collect();
    Ok(DensityPhase {
        density,
        phase,
        phase_defined,
    })
}

/// Azimuthally averaged density in equal-width annuli.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    /// Bin centers (μm).
    pub radii: Vec<f64>,
    pub bin_width: f64,
    /// Mean density per bin, 0 for empty bins.
    pub mean_density: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RadialProfile {
    /// `Σ mean·(annulus measure)`, the mass the profile represents.
    pub fn mass(&self, dim: usize) -> f64 {
        self.radii
            .iter()
            .zip(&self.mean_density)
            .map(|(&r, &d)| {
                let (r0, r1) = (r - 0.5 * self.bin_width, r + 0.5 * self.bin_width);
                let measure = if dim == 1 {
                    2.0 * (r1 - r0)
                } else {
                    PI * (r1 * r1 - r0 * r0)
                };
                d * measure
            })
            .sum()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "r_um,mean_density,count")?;
        for i in 0..self.radii.len() {
            writeln!(
                w,
                "{:.9e},{:.12e},{}",
                self.radii[i], self.mean_density[i], self.counts[i]
            )?;
        }
        Ok(())
    }
}

/// Bins `density` by distance from `center` into `n_bins` annuli covering
/// `[0, min(L_x, L_y)/2)`; nodes outside are ignored. In 1D the "annuli" are
/// the symmetric intervals `r ≤ |x − c| < r + Δr`.
pub fn radial_profile(density: &[f64], grid: &Grid, center: [f64; 2], n_bins: usize) -> Result<RadialProfile> {
    if n_bins < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 radial bins, got {n_bins}"
        )));
    }
    if density.len() != grid.len() {
        return Err(Error::GridMismatch("density does not match grid".into()));
    }
    let r_max = if grid.dim() == 1 {
        0.5 * grid.lx()
    } else {
        0.5 * grid.lx().min(grid.ly())
    };
    let inside = |c: f64, l: f64| c.abs() <= 0.5 * l;
    if !inside(center[0], grid.lx()) || (grid.dim() == 2 && !inside(center[1], grid.ly())) {
        return Err(Error::InvalidParameter(format!("center {center:?} outside the domain")));
    }
    let width = r_max / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (i, &d) in density.iter().enumerate() {
        let [x, y] = grid.position(i);
        let r = (x - center[0]).hypot(if grid.dim() == 1 { 0.0 } else { y - center[1] });
        let b = (r / width) as usize;
        if b < n_bins {
            sums[b] += d;
            counts[b] += 1;
        }
    }
    let mean_density = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    Ok(RadialProfile {
        radii: (0..n_bins).map(|b| (b as f64 + 0.5) * width).collect(),
        bin_width: width,
        mean_density,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingEstimate {
    /// Peak radius (μm); 0 when `no_ring`.
    pub radius: f64,
    /// The density maximum sits in the innermost bin: a centered blob.
    pub no_ring: bool,
}

/// Radius of the radial-density maximum, refined by a parabola through the
/// peak bin and its neighbours.
pub fn ring_radius(profile: &RadialProfile) -> RingEstimate {
    let d = &profile.mean_density;
    let peak =
        d.iter()
            .enumerate()
            .filter(|(i, _)| profile.counts[*i] > 0)
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            );
    let i = peak.0;
    if i == 0 {
        return RingEstimate {
            radius: 0.0,
            no_ring: true,
        };
    }
    if i + 1 >= d.len() || profile.counts[i + 1] == 0 {
        return RingEstimate {
            radius: profile.radii[i],
            no_ring: false,
        };
    }
    let (a, b, c) = (d[i - 1], d[i], d[i + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom.abs() > 0.0 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    RingEstimate {
        radius: profile.radii[i] + offset * profile.bin_width,
        no_ring: false,
    }
}

/// Density-weighted mean of `|r − c|²` about the density centroid (μm²).
pub fn second_moment(density: &[f64], grid: &Grid) -> f64 {
    let total: f64 = density.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut c = [0.0; 2];
    for (i, &d) in density.iter().enumerate() {
        let p = grid.position(i);
        c[0] += d * p[0];
        c[1] += d * p[1];
    }
    c[0] /= total;
    c[1] /= total;
    density
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let p = grid.position(i);
            d * ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2))
        })
        .sum::<f64>()
        / total
}

/// Writes a real map as CSV rows (one row per y index, x fastest).
pub fn write_map_csv(values: &[f64], grid: &Grid, mut w: impl Write) -> Result<()> {
    for row in values.chunks(grid.nx()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Mass-balance residual at a state: evolves two steps of size `dt` from
/// `state` and compares the centered difference `(M₂ − M₀)/(2dt)` with
/// `−(2η/ħ)⟨ψ,Kψ⟩ + (2/ħ)Re⟨ψ,P⟩ − γM` evaluated at the middle state.
/// Both sides agree to O(dt²).
pub fn mass_balance_residual(state: &SimState, params: &ModelParams, dt: f64) -> Result<f64> {
    let integ = Integrator::new(state.field.grid, params, dt, IntegratorOptions::default())?;
    let grid = state.field.grid;
    let m0 = total_mass(&state.field);
    let mut s = state.clone();
    integ.step(&mut s)?;
    let rhs = integ.balance_rhs(&s.field.values, s.time);
    integ.step(&mut s)?;
    let m2 = total_mass_values(&s.field.values, &grid);
    Ok(((m2 - m0) / (2.0 * dt) - rhs).abs())
}
