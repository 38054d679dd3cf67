use thiserror::Error;

use crate::spectral::Space;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is in {found:?} space, expected {expected:?}")]
    WrongSpace { expected: Space, found: Space },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("k = {k} outside the multiplier domain [{lo}, {hi}]")]
    OutOfDomain { k: f64, lo: f64, hi: f64 },

    #[error("no sign change of the branch curvature on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("non-finite value at node {node} (t = {time} ps)")]
    NonFinite { node: usize, time: f64 },

    #[error("watchdog: max|ψ| = {max_abs:e} exceeds {threshold:e} at t = {time} ps (step {step})")]
    Watchdog {
        time: f64,
        max_abs: f64,
        threshold: f64,
        step: u64,
    },

    #[error("resonant denominator {modulus:e} at k = ({kx}, {ky})")]
    Resonance { kx: f64, ky: f64, modulus: f64 },

    #[error("degenerate plane-wave root: a + ib − αρ vanishes at ρ = {rho}")]
    DegenerateRoot { rho: f64 },

    #[error("branch fold between P₀ = {p0_before} and P₀ = {p0_after}")]
    BranchFold { p0_before: f64, p0_after: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
