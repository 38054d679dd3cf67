//! Mean-field simulation of polariton condensates whose kinetic energy is a
//! general radial Fourier multiplier: constant mass, fractional power
//! `|k|^{2s}`, or the curvature of the lower polariton branch (velocity
//! dependent mass).
//!
//! Units throughout: lengths in μm, times in ps, energies in meV. Masses are
//! stored in units of ħ²/(meV·μm²) so that `k²/(2m)` is directly an energy in
//! meV; see [`units`] for conversions.
//!
//! Module map:
//! - [`dispersion`]: cavity/exciton/polariton branches, effective mass, kinetic symbols.
//! - [`spectral`]: periodic grids, FFT conventions, Fourier multipliers, snapshots.
//! - [`dynamics`]: Strang time-splitting integrator for the driven dissipative model.
//! - [`analytic`]: homogeneous plane-wave states and Bogoliubov linear response.
//! - [`observables`]: mass, density/phase, radial profiles, ring radius, balance law.
//! - [`presets`]: documented default parameter sets for the reference experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod dispersion;
pub mod dynamics;
mod error;
pub mod observables;
pub mod presets;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
