//! Microcavity dispersion: bare cavity and exciton branches, the two polariton
//! branches obtained by diagonalizing the 2×2 light–matter Hamiltonian, the
//! signed inverse effective mass of the lower branch, and the kinetic symbols
//! `g(k)` used as Fourier multipliers by the dynamics.

use crate::units::mass_from_electron_masses;
use crate::{Error, Result};

/// Exciton energy at k = 0 in meV.
pub const DEFAULT_EXCITON_ENERGY: f64 = 1557.0;

/// ħΩ_R (meV) for which the default cavity has its lower-branch inflection
/// at k = 1.3952 μm⁻¹. Reproduced by [`calibrate_rabi`].
pub const CALIBRATED_RABI: f64 = 0.942_070_715_463_927;

/// Target inflection wavenumber (μm⁻¹) used for the calibration.
pub const REFERENCE_INFLECTION: f64 = 1.3952;

/// Functional form of the cavity photon dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CavityForm {
    /// `E_c0 + k²/(2 m_c)`.
    #[default]
    Paraxial,
    /// `E_c0 · sqrt(1 + k²/k_z²)` with `k_z² = m_c E_c0`, which has the
    /// paraxial form as its small-k expansion.
    Exact,
}

/// Microcavity constants. Energies in meV, masses in ħ²/(meV·μm²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub exciton_energy: f64,
    /// Cavity photon energy at k = 0 (ħω₀).
    pub cavity_offset: f64,
    pub photon_mass: f64,
    pub exciton_mass: f64,
    /// ħΩ_R; the branch splitting at resonance is `2ħΩ_R`.
    pub rabi: f64,
    pub form: CavityForm,
}

impl Default for CavityParams {
    /// m_c = 1e-4 m_e, m_x = 0.5 m_e, zero detuning at 1557 meV and the
    /// calibrated Rabi energy.
    fn default() -> Self {
        CavityParams {
            exciton_energy: DEFAULT_EXCITON_ENERGY,
            cavity_offset: DEFAULT_EXCITON_ENERGY,
            photon_mass: mass_from_electron_masses(1e-4),
            exciton_mass: mass_from_electron_masses(0.5),
            rabi: CALIBRATED_RABI,
            form: CavityForm::Paraxial,
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(what.to_string()))
            }
        };
        check(self.photon_mass > 0.0, "photon mass must be positive")?;
        check(self.exciton_mass > 0.0, "exciton mass must be positive")?;
        check(self.rabi > 0.0, "Rabi energy must be positive")?;
        check(self.exciton_energy > 0.0, "exciton energy must be positive")?;
        check(
            self.form == CavityForm::Paraxial || self.cavity_offset > 0.0,
            "exact cavity form needs a positive cavity offset",
        )
    }

    /// Value and first two k-derivatives of the cavity dispersion.
    fn cavity_jet(&self, k: f64) -> [f64; 3] {
        match self.form {
            CavityForm::Paraxial => {
                let inv = 1.0 / self.photon_mass;
                [self.cavity_offset + 0.5 * k * k * inv, k * inv, inv]
            }
            CavityForm::Exact => {
                let e0 = self.cavity_offset;
                let kz2 = self.photon_mass * e0;
                let w = 1.0 + k * k / kz2;
                let sw = w.sqrt();
                [e0 * sw, e0 * k / (kz2 * sw), e0 / (kz2 * w * sw)]
            }
        }
    }

    fn exciton_jet(&self, k: f64) -> [f64; 3] {
        let inv = 1.0 / self.exciton_mass;
        [self.exciton_energy + 0.5 * k * k * inv, k * inv, inv]
    }

    /// Second derivatives of (E_L, E_U).
    fn branch_curvatures(&self, k: f64) -> (f64, f64) {
        let [ec, dec, d2ec] = self.cavity_jet(k);
        let [ex, dex, d2ex] = self.exciton_jet(k);
        // f = sqrt(δ² + 4R²), δ = E_x − E_c
        let d = ex - ec;
        let dd = dex - dec;
        let d2d = d2ex - d2ec;
        let f = (d * d + 4.0 * self.rabi * self.rabi).sqrt();
        let f2 = (dd * dd + d * d2d) / f - (d * dd).powi(2) / (f * f * f);
        let mean = 0.5 * (d2ec + d2ex);
        (mean - 0.5 * f2, mean + 0.5 * f2)
    }
}

/// Cavity photon energy `E_c(k)` in meV.
pub fn cavity_energy(k: f64, p: &CavityParams) -> f64 {
    p.cavity_jet(k)[0]
}

/// Exciton energy `E_x + k²/(2 m_x)` in meV.
pub fn exciton_energy(k: f64, p: &CavityParams) -> f64 {
    p.exciton_jet(k)[0]
}

/// Lower and upper polariton energies `(E_L, E_U)` in meV.
pub fn branch_energies(k: f64, p: &CavityParams) -> (f64, f64) {
    let ec = cavity_energy(k, p);
    let ex = exciton_energy(k, p);
    let mean = 0.5 * (ec + ex);
    let half_gap = 0.5 * ((ex - ec).powi(2) + 4.0 * p.rabi * p.rabi).sqrt();
    (mean - half_gap, mean + half_gap)
}

/// Analytic `∂²E_L/∂k²` in meV·μm².
pub fn lower_branch_curvature(k: f64, p: &CavityParams) -> f64 {
    p.branch_curvatures(k).0
}

/// Analytic `∂²E_U/∂k²` in meV·μm². Only tabulated, never used for dynamics.
pub fn upper_branch_curvature(k: f64, p: &CavityParams) -> f64 {
    p.branch_curvatures(k).1
}

/// Signed inverse effective mass of the lower branch, `1/m(k) = ∂²E_L/ħ²`,
/// in (meV·μm²)/ħ². Zero at the inflection point and negative above it, where
/// the mass itself diverges and flips sign.
pub fn inverse_effective_mass(k: f64, p: &CavityParams) -> f64 {
    lower_branch_curvature(k, p)
}

/// Bisection root of `∂²E_L` on `[lo, hi]`.
///
/// Bisection runs until the bracket stops shrinking in floating point, which
/// is far below the 1e-6 μm⁻¹ the callers rely on.
pub fn find_inflection(p: &CavityParams, lo: f64, hi: f64) -> Result<f64> {
    p.validate()?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "inflection bracket [{lo}, {hi}] must satisfy 0 ≤ lo < hi"
        )));
    }
    let f = |k: f64| lower_branch_curvature(k, p);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// First inflection point above k = 0, located by scanning `[0, k_max]` in
/// steps of 0.01 μm⁻¹ and refining with [`find_inflection`].
pub fn first_inflection(p: &CavityParams, k_max: f64) -> Result<f64> {
    let step = 0.01;
    let mut k0 = 0.0;
    let mut c0 = lower_branch_curvature(k0, p);
    while k0 < k_max {
        let k1 = (k0 + step).min(k_max);
        let c1 = lower_branch_curvature(k1, p);
        if c0.signum() != c1.signum() || c1 == 0.0 {
            return find_inflection(p, k0, k1);
        }
        k0 = k1;
        c0 = c1;
    }
    Err(Error::Bracket { lo: 0.0, hi: k_max })
}

/// Rabi energy that places the first inflection of `base` at `target_k`.
///
/// The inflection point grows monotonically with ħΩ_R, so a bisection over
/// `rabi_bracket` suffices.
pub fn calibrate_rabi(base: &CavityParams, target_k: f64, rabi_bracket: (f64, f64)) -> Result<f64> {
    let k_of = |rabi: f64| {
        let p = CavityParams { rabi, ..*base };
        first_inflection(&p, 10.0 * target_k.max(1.0))
    };
    let (mut lo, mut hi) = rabi_bracket;
    let below = k_of(lo)? - target_k;
    let above = k_of(hi)? - target_k;
    if below.signum() == above.signum() {
        return Err(Error::InvalidParameter(format!(
            "Rabi bracket [{lo}, {hi}] does not enclose k_inf = {target_k}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (k_of(mid)? - target_k).signum() == below.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Choice of kinetic Fourier symbol `g(|k|)` in meV.
#[derive(Debug, Clone, PartialEq)]
pub enum KineticSpec {
    /// `k²/(2m)` with `m` in ħ²/(meV·μm²).
    ConstantMass { mass: f64 },
    /// `c_s · k^{2s}`, `0 < s ≤ 1`, coefficient in meV·μm^{2s}.
    FractionalPower { s: f64, coefficient: f64 },
    /// `k² ∂²E_L(k)`, halved when `prefactor_half` so that the small-k limit
    /// is the standard `k²/(2 m_L(0))`.
    LowerBranchCurvature { params: CavityParams, prefactor_half: bool },
    /// Monotone cubic (PCHIP) interpolation through `(k_nodes, g_values)`.
    Tabulated { k_nodes: Vec<f64>, g_values: Vec<f64> },
}

impl KineticSpec {
    /// Velocity dependent mass of the default calibrated cavity.
    pub fn curvature_default() -> Self {
        KineticSpec::LowerBranchCurvature {
            params: CavityParams::default(),
            prefactor_half: true,
        }
    }

    /// Constant mass equal to the lower-branch mass at k = 0, i.e. the
    /// parabolic model that agrees with the curvature symbol as k → 0.
    pub fn constant_mass_matching(params: &CavityParams) -> Self {
        KineticSpec::ConstantMass {
            mass: 1.0 / lower_branch_curvature(0.0, params),
        }
    }

    pub fn validate(&self) -> Result<()> {
        KineticSymbol::new(self).map(|_| ())
    }
}

/// Validated, evaluation-ready form of a [`KineticSpec`].
#[derive(Debug, Clone)]
pub struct KineticSymbol {
    kind: SymbolKind,
}

#[derive(Debug, Clone)]
enum SymbolKind {
    Constant { inv_mass: f64 },
    Fractional { s: f64, coefficient: f64 },
    Curvature { params: CavityParams, scale: f64 },
    Table(MonotoneCubic),
}

impl KineticSymbol {
    pub fn new(spec: &KineticSpec) -> Result<Self> {
        let kind = match spec {
            KineticSpec::ConstantMass { mass } => {
                if !(*mass != 0.0 && mass.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "constant mass must be finite and nonzero, got {mass}"
                    )));
                }
                SymbolKind::Constant { inv_mass: 1.0 / mass }
            }
            KineticSpec::FractionalPower { s, coefficient } => {
                if !(*s > 0.0 && *s <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fractional power s = {s} outside (0, 1]"
                    )));
                }
                SymbolKind::Fractional {
                    s: *s,
                    coefficient: *coefficient,
                }
            }
            KineticSpec::LowerBranchCurvature { params, prefactor_half } => {
                params.validate()?;
                SymbolKind::Curvature {
                    params: *params,
                    scale: if *prefactor_half { 0.5 } else { 1.0 },
                }
            }
            KineticSpec::Tabulated { k_nodes, g_values } => SymbolKind::Table(MonotoneCubic::new(k_nodes, g_values)?),
        };
        Ok(KineticSymbol { kind })
    }

    /// `g(k)` in meV for `k ≥ 0`.
    pub fn eval(&self, k: f64) -> Result<f64> {
        Ok(match &self.kind {
            SymbolKind::Constant { inv_mass } => 0.5 * k * k * inv_mass,
            SymbolKind::Fractional { s, coefficient } => {
                if k == 0.0 {
                    0.0
                } else {
                    coefficient * k.powf(2.0 * s)
                }
            }
            SymbolKind::Curvature { params, scale } => scale * k * k * lower_branch_curvature(k, params),
            SymbolKind::Table(t) => t.eval(k)?,
        })
    }
}

/// Kinetic prefactor `g(k)` in meV for one wavenumber.
pub fn kinetic_prefactor_g(k: f64, spec: &KineticSpec) -> Result<f64> {
    KineticSymbol::new(spec)?.eval(k)
}

/// Scale `c` minimising `max_i |c·basis_i − target_i|`, and that maximum.
pub fn minimax_scale(basis: &[f64], target: &[f64]) -> Result<(f64, f64)> {
    if basis.len() != target.len() || basis.is_empty() {
        return Err(Error::InvalidParameter(
            "basis and target must be nonempty and equally long".into(),
        ));
    }
    let worst = |c: f64| {
        basis
            .iter()
            .zip(target)
            .map(|(b, t)| (c * b - t).abs())
            .fold(0.0, f64::max)
    };
    let ratios = basis.iter().zip(target).filter(|(b, _)| **b != 0.0).map(|(b, t)| t / b);
    let (mut lo, mut hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r), h.max(r)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter("basis is identically zero".into()));
    }
    // the objective is convex in c
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if worst(m1) <= worst(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let c = 0.5 * (lo + hi);
    Ok((c, worst(c)))
}

/// Best uniform fit of `c·k^{2s}` to the halved curvature symbol of `params`
/// on `n` equispaced samples of `(0, k_hi]`. Returns `c` and the maximum
/// absolute error divided by the maximum of `|g|` on the samples.
pub fn fit_power_to_curvature(params: &CavityParams, s: f64, k_hi: f64, n: usize) -> Result<(f64, f64)> {
    if !(s > 0.0 && s <= 1.0 && k_hi > 0.0 && n >= 2) {
        return Err(Error::InvalidParameter("need 0 < s ≤ 1, k_hi > 0 and n ≥ 2".into()));
    }
    let ks: Vec<f64> = (1..=n).map(|i| k_hi * i as f64 / n as f64).collect();
    let g: Vec<f64> = ks
        .iter()
        .map(|&k| 0.5 * k * k * lower_branch_curvature(k, params))
        .collect();
    let basis: Vec<f64> = ks.iter().map(|&k| k.powf(2.0 * s)).collect();
    let (c, err) = minimax_scale(&basis, &g)?;
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((c, err / scale))
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson
/// slopes with the three-point end condition).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::InvalidParameter(
                "tabulated symbol needs ≥ 2 nodes and matching value count".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "tabulated k nodes must be strictly increasing".into(),
            ));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated symbol has non-finite entries".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic {
            x: x.to_vec(),
            y: y.to_vec(),
            slopes,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.x[0], self.x[self.x.len() - 1]);
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain { k: t, lo, hi });
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1])
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
