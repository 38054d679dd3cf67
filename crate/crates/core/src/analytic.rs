//! Closed-form solutions of the driven model.
//!
//! Plane waves: with a homogeneous pump `P₀ e^{iκx} e^{−iω_i t/ħ}` and no
//! potential, `ψ = ψ₀ e^{iκx} e^{−iω_i t/ħ}` is stationary iff
//!
//! ```text
//! (a + ib − αρ) ψ₀ = i P₀,   a = ω_i − ω − g(κ),   b = ħγ/2,   ρ = |ψ₀|²
//! ```
//!
//! Taking the modulus squared gives the real cubic
//! `((a − αρ)² + b²) ρ = P₀²`, solved here for ρ; ψ₀ then follows by back
//! substitution. This yields the same roots as the radical formula without
//! its complex cube-root branch cuts.
//!
//! Linear response: a perturbation travelling with velocity `v` on a
//! condensate of chemical potential `μ = αn` obeys
//!
//! ```text
//! δψ*₋ₖ = (P̃μ + P̃*(iγ + k·v − g − μ)) / (γ² + 2μg + g² − 2iγ k·v − (k·v)²)
//! ```
//!
//! with `g` and `μ` converted from meV to ps⁻¹ so that they combine with
//! `γ` and `k·v`.

use crate::dispersion::{KineticSpec, KineticSymbol};
use crate::spectral::Grid;
use crate::units::HBAR;
use crate::{Error, Result, C64};

/// Homogeneous plane-wave stationary problem. Energies in meV, γ in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveProblem {
    /// Pump wavenumber κ_i (μm⁻¹).
    pub kappa: f64,
    /// Pump energy ħω_i.
    pub pump_energy: f64,
    /// Homogeneous pump amplitude P₀ (meV·field units).
    pub pump_amplitude: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub omega: f64,
    /// Kinetic symbol at the pump wavenumber, g(κ_i).
    pub g_at_kappa: f64,
}

impl PlaneWaveProblem {
    pub fn new(
        kappa: f64,
        pump_energy: f64,
        pump_amplitude: f64,
        alpha: f64,
        gamma: f64,
        omega: f64,
        kinetic: &KineticSpec,
    ) -> Result<Self> {
        if !(pump_amplitude >= 0.0 && gamma >= 0.0) {
            return Err(Error::InvalidParameter("need P₀ ≥ 0 and γ ≥ 0".into()));
        }
        let g_at_kappa = KineticSymbol::new(kinetic)?.eval(kappa.abs())?;
        Ok(PlaneWaveProblem {
            kappa,
            pump_energy,
            pump_amplitude,
            alpha,
            gamma,
            omega,
            g_at_kappa,
        })
    }

    /// `a = ω_i − ω − g(κ_i)` (meV).
    pub fn a(&self) -> f64 {
        self.pump_energy - self.omega - self.g_at_kappa
    }

    /// `b = ħγ/2` (meV).
    pub fn b(&self) -> f64 {
        0.5 * HBAR * self.gamma
    }

    pub fn with_amplitude(&self, pump_amplitude: f64) -> Self {
        PlaneWaveProblem {
            pump_amplitude,
            ..*self
        }
    }

    /// Coefficients `[c₀, c₁, c₂, c₃]` of `α²ρ³ − 2aαρ² + (a² + b²)ρ − P₀²`.
    pub fn cubic_coefficients(&self) -> [f64; 4] {
        let (a, b, al) = (self.a(), self.b(), self.alpha);
        [-self.pump_amplitude.powi(2), a * a + b * b, -2.0 * a * al, al * al]
    }

    pub fn cubic(&self, rho: f64) -> f64 {
        let [c0, c1, c2, c3] = self.cubic_coefficients();
        ((c3 * rho + c2) * rho + c1) * rho + c0
    }

    /// `|cubic(ρ)|` relative to the sum of the magnitudes of its terms.
    pub fn cubic_relative_residual(&self, rho: f64) -> f64 {
        let [c0, c1, c2, c3] = self.cubic_coefficients();
        let scale = c0.abs() + (c1 * rho).abs() + (c2 * rho * rho).abs() + (c3 * rho.powi(3)).abs();
        if scale == 0.0 {
            0.0
        } else {
            self.cubic(rho).abs() / scale
        }
    }

    /// Discriminant of the density cubic: positive for three distinct real
    /// roots, negative for one.
    pub fn discriminant(&self) -> f64 {
        let [d, c, b, a] = self.cubic_coefficients();
        18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d
    }
}

/// Real roots `ρ ≥ 0` of the density cubic, ascending.
///
/// For `ρ < 0` the cubic is strictly negative, so every real root is
/// nonnegative. Roots are bracketed between the cubic's critical points,
/// bisected and polished with Newton steps. With `α = 0` the problem is
/// linear and the single density `P₀²/(a² + b²)` is returned.
pub fn density_cubic_roots(prob: &PlaneWaveProblem) -> Result<Vec<f64>> {
    let (a, b, alpha) = (prob.a(), prob.b(), prob.alpha);
    let p2 = prob.pump_amplitude.powi(2);
    if alpha == 0.0 {
        let lin = a * a + b * b;
        if lin == 0.0 {
            return Err(Error::InvalidParameter(
                "linear plane-wave problem with a = b = 0 has no unique density".into(),
            ));
        }
        return Ok(vec![p2 / lin]);
    }
    if p2 == 0.0 {
        let mut roots = vec![0.0];
        if b == 0.0 && a / alpha > 0.0 {
            roots.push(a / alpha);
        }
        return Ok(roots);
    }

    // f'(ρ) = 3α²ρ² − 4aαρ + (a² + b²)
    let mut breaks = vec![0.0];
    let disc = a * a - 3.0 * b * b;
    if disc > 0.0 {
        let s = disc.sqrt();
        let mut crit = [(2.0 * a - s) / (3.0 * alpha), (2.0 * a + s) / (3.0 * alpha)];
        crit.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.extend(crit.iter().filter(|&&c| c > 0.0));
    }
    let mut upper = breaks.last().copied().unwrap_or(0.0).max(1.0);
    while prob.cubic(upper) <= 0.0 {
        upper *= 2.0;
        if !upper.is_finite() {
            return Err(Error::InvalidParameter("density cubic has no finite upper root".into()));
        }
    }
    breaks.push(upper);

    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (prob.cubic(lo), prob.cubic(hi));
        if flo == 0.0 && lo > 0.0 {
            push_unique(&mut roots, lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        push_unique(&mut roots, polish(prob, bisect(prob, lo, hi)));
    }
    Ok(roots)
}

fn push_unique(roots: &mut Vec<f64>, r: f64) {
    if roots
        .last()
        .is_none_or(|&l| (r - l).abs() > 1e-14 * r.abs().max(1e-300))
    {
        roots.push(r);
    }
}

fn bisect(prob: &PlaneWaveProblem, mut lo: f64, mut hi: f64) -> f64 {
    let flo = prob.cubic(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = prob.cubic(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polish(prob: &PlaneWaveProblem, mut rho: f64) -> f64 {
    let [_, c1, c2, c3] = prob.cubic_coefficients();
    for _ in 0..3 {
        let d = (3.0 * c3 * rho + 2.0 * c2) * rho + c1;
        if d == 0.0 {
            break;
        }
        let next = rho - prob.cubic(rho) / d;
        if !(next >= 0.0) || prob.cubic(next).abs() >= prob.cubic(rho).abs() {
            break;
        }
        rho = next;
    }
    rho
}

/// Complex amplitude `ψ₀ = iP₀/(a + ib − αρ)` for a density root ρ.
pub fn plane_wave_state(prob: &PlaneWaveProblem, rho: f64) -> Result<C64> {
    let denom = C64::new(prob.a() - prob.alpha * rho, prob.b());
    if denom.norm() == 0.0 {
        if prob.pump_amplitude == 0.0 {
            // ρ = a/α with b = 0: any phase works, pick the real one
            return Ok(C64::new(rho.sqrt(), 0.0));
        }
        return Err(Error::DegenerateRoot { rho });
    }
    Ok(C64::new(0.0, prob.pump_amplitude) / denom)
}

/// Residual `|(a + ib − αρ)ψ₀ − iP₀|` of the stationary equation with ρ = |ψ₀|².
pub fn stationary_residual(prob: &PlaneWaveProblem, psi0: C64) -> f64 {
    let denom = C64::new(prob.a() - prob.alpha * psi0.norm_sqr(), prob.b());
    (denom * psi0 - C64::new(0.0, prob.pump_amplitude)).norm()
}

/// What to do when the tracked lower branch ceases to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldPolicy {
    /// Fail with [`Error::BranchFold`].
    Error,
    /// Record the fold and continue on the remaining (upper) root.
    #[default]
    Jump,
}

/// Change in the number of real roots between consecutive grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCountChange {
    pub p0_before: f64,
    pub p0_after: f64,
    pub count_before: usize,
    pub count_after: usize,
}

/// Physical plane-wave branch over a P₀ sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCurve {
    pub p0: Vec<f64>,
    pub rho: Vec<f64>,
    pub psi: Vec<C64>,
    /// Number of real density roots at each P₀.
    pub root_counts: Vec<usize>,
    /// Grid intervals where other real branches appear or disappear.
    pub transitions: Vec<RootCountChange>,
    /// Grid intervals where the tracked branch folded (only with [`FoldPolicy::Jump`]).
    pub folds: Vec<(f64, f64)>,
}

/// Continues the branch that starts at ρ = 0 for P₀ → 0 along an ascending
/// P₀ grid. Where three roots coexist the lowest one is followed; the upper
/// bistable branch is never selected while the lower one exists.
pub fn physical_branch(prob: &PlaneWaveProblem, p0_grid: &[f64], policy: FoldPolicy) -> Result<BranchCurve> {
    if p0_grid.is_empty() || p0_grid.windows(2).any(|w| !(w[1] > w[0])) || p0_grid[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "P₀ grid must be nonnegative and strictly ascending".into(),
        ));
    }
    let mut curve = BranchCurve {
        p0: Vec::with_capacity(p0_grid.len()),
        rho: Vec::with_capacity(p0_grid.len()),
        psi: Vec::with_capacity(p0_grid.len()),
        root_counts: Vec::with_capacity(p0_grid.len()),
        transitions: Vec::new(),
        folds: Vec::new(),
    };
    let mut prev_roots: Vec<f64> = Vec::new();
    for &p0 in p0_grid {
        let pr = prob.with_amplitude(p0);
        let roots = density_cubic_roots(&pr)?;
        let rho = roots[0];
        if let (Some(&prev_p0), Some(&prev_rho)) = (curve.p0.last(), curve.rho.last()) {
            if roots.len() != prev_roots.len() {
                curve.transitions.push(RootCountChange {
                    p0_before: prev_p0,
                    p0_after: p0,
                    count_before: prev_roots.len(),
                    count_after: roots.len(),
                });
            }
            // lower branch vanished: the only survivor lies beyond the old middle root
            let folded = prev_roots.len() >= 3 && prev_rho == prev_roots[0] && rho > prev_roots[1];
            if folded {
                match policy {
                    FoldPolicy::Error => {
                        return Err(Error::BranchFold {
                            p0_before: prev_p0,
                            p0_after: p0,
                        })
                    }
                    FoldPolicy::Jump => curve.folds.push((prev_p0, p0)),
                }
            }
        }
        curve.psi.push(plane_wave_state(&pr, rho)?);
        curve.p0.push(p0);
        curve.rho.push(rho);
        curve.root_counts.push(roots.len());
        prev_roots = roots;
    }
    Ok(curve)
}

/// Linear-response query. `mu` in meV, `gamma` in ps⁻¹, `k` in μm⁻¹,
/// `velocity` in μm/ps.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseQuery {
    pub k: [f64; 2],
    pub velocity: [f64; 2],
    pub mu: f64,
    pub gamma: f64,
    pub pump: C64,
    pub kinetic: KineticSpec,
}

/// Denominators with modulus at or below this are treated as resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-12;

/// Numerator and denominator of the response in ps⁻¹ units.
fn response_parts(g: f64, mu: f64, gamma: f64, kv: f64, pump: C64) -> (C64, C64) {
    let g = g / HBAR;
    let mu = mu / HBAR;
    let num = pump * mu + pump.conj() * C64::new(kv - g - mu, gamma);
    let den = C64::new(gamma * gamma + 2.0 * mu * g + g * g - kv * kv, -2.0 * gamma * kv);
    (num, den)
}

fn response_with_symbol(q: &ResponseQuery, symbol: &KineticSymbol) -> Result<C64> {
    let kabs = q.k[0].hypot(q.k[1]);
    let g = symbol.eval(kabs)?;
    let kv = q.k[0] * q.velocity[0] + q.k[1] * q.velocity[1];
    let (num, den) = response_parts(g, q.mu, q.gamma, kv, q.pump);
    if den.norm() <= RESONANCE_THRESHOLD {
        return Err(Error::Resonance {
            kx: q.k[0],
            ky: q.k[1],
            modulus: den.norm(),
        });
    }
    Ok(num / den)
}

/// `δψ*₋ₖ` for one wavevector.
pub fn bogoliubov_response(q: &ResponseQuery) -> Result<C64> {
    response_with_symbol(q, &KineticSymbol::new(&q.kinetic)?)
}

/// `|δψ₋ₖ|` over the k-lattice of a grid, in ascending-k order:
/// node `(ix, iy)` holds `k = 2π(ix − N_x/2, iy − N_y/2)/L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub grid: Grid,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    /// Row-major (x fastest); NaN at masked nodes.
    pub magnitude: Vec<f64>,
    pub masked: Vec<bool>,
}

impl ResponseMap {
    pub fn masked_count(&self) -> usize {
        self.masked.iter().filter(|m| **m).count()
    }

    /// Long-format CSV: `kx,ky,abs_dpsi,masked`.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "kx_per_um,ky_per_um,abs_dpsi,masked")?;
        let nx = self.kx.len();
        for (i, (m, masked)) in self.magnitude.iter().zip(&self.masked).enumerate() {
            writeln!(
                w,
                "{:.9e},{:.9e},{:.12e},{}",
                self.kx[i % nx],
                self.ky[i / nx],
                m,
                u8::from(*masked)
            )?;
        }
        Ok(())
    }
}

/// Evaluates the response at every lattice wavevector of `grid`, using the
/// velocity, μ, γ, P̃ and kinetic symbol of `template` (its `k` is ignored).
/// Resonant nodes are masked rather than reported as errors.
pub fn response_map(grid: &Grid, template: &ResponseQuery) -> Result<ResponseMap> {
    let symbol = KineticSymbol::new(&template.kinetic)?;
    let axis = |n: usize, l: f64| -> Vec<f64> {
        (0..n)
            .map(|i| 2.0 * std::f64::consts::PI * (i as f64 - (n / 2) as f64) / l)
            .collect()
    };
    let kx = axis(grid.nx(), grid.lx());
    let ky = if grid.dim() == 1 {
        vec![0.0]
    } else {
        axis(grid.ny(), grid.ly())
    };
    let mut magnitude = Vec::with_capacity(grid.len());
    let mut masked = Vec::with_capacity(grid.len());
    for &y in &ky {
        for &x in &kx {
            let q = ResponseQuery {
                k: [x, y],
                kinetic: KineticSpec::ConstantMass { mass: 1.0 },
                ..template.clone()
            };
            match response_with_symbol(&q, &symbol) {
                Ok(v) => {
                    magnitude.push(v.norm());
                    masked.push(false);
                }
                Err(Error::Resonance { .. }) => {
                    magnitude.push(f64::NAN);
                    masked.push(true);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ResponseMap {
        grid: *grid,
        kx,
        ky,
        magnitude,
        masked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(a: f64, b: f64, alpha: f64, p0: f64) -> PlaneWaveProblem {
        // choose ω_i and γ so that a and b come out as requested
        PlaneWaveProblem {
            kappa: 0.0,
            pump_energy: a,
            pump_amplitude: p0,
            alpha,
            gamma: 2.0 * b / HBAR,
            omega: 0.0,
            g_at_kappa: 0.0,
        }
    }

    /// Sign changes of the cubic on a dense grid, refined by bisection.
    fn scan_roots(p: &PlaneWaveProblem, hi: f64, n: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        let mut x0 = 0.0;
        let mut f0 = p.cubic(x0);
        for i in 1..=n {
            let x1 = hi * i as f64 / n as f64;
            let f1 = p.cubic(x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0.signum() != f1.signum() && f1 != 0.0 {
                let (mut lo, mut up) = (x0, x1);
                for _ in 0..200 {
                    let m = 0.5 * (lo + up);
                    if p.cubic(m).signum() == p.cubic(lo).signum() {
                        lo = m
                    } else {
                        up = m
                    }
                }
                roots.push(0.5 * (lo + up));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn zero_pump_admits_zero_density() {
        let p = problem(1.0, 0.5, 1.0, 0.0);
        let roots = density_cubic_roots(&p).unwrap();
        assert_eq!(roots, vec![0.0]);
        assert_eq!(plane_wave_state(&p, 0.0).unwrap(), C64::new(0.0, 0.0));
        let lossless = problem(1.0, 0.0, 2.0, 0.0);
        assert_eq!(density_cubic_roots(&lossless).unwrap(), vec![0.0, 0.5]);
    }

    #[test]
    fn generic_roots_match_scan() {
        let p = problem(1.0, 0.5, 1.0, 1.0);
        let roots = density_cubic_roots(&p).unwrap();
        let scanned = scan_roots(&p, 10.0, 100_000);
        assert_eq!(roots.len(), scanned.len());
        for (r, s) in roots.iter().zip(&scanned) {
            assert!((r - s).abs() < 1e-9, "{r} vs {s}");
            assert!(p.cubic_relative_residual(*r) < 1e-10);
        }
    }

    #[test]
    fn bistable_window_found() {
        // a > √3 b is needed for a fold
        let base = problem(3.0, 0.5, 1.0, 0.0);
        let counts: Vec<usize> = (1..400)
            .map(|i| {
                density_cubic_roots(&base.with_amplitude(i as f64 * 0.01))
                    .unwrap()
                    .len()
            })
            .collect();
        assert!(counts.contains(&3));
        assert_eq!(counts[0], 1);
        assert_eq!(*counts.last().unwrap(), 1);
    }

    #[test]
    fn linear_case() {
        let p = problem(2.0, 1.0, 0.0, 3.0);
        assert_eq!(density_cubic_roots(&p).unwrap(), vec![9.0 / 5.0]);
        assert!(density_cubic_roots(&problem(0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn state_back_substitution() {
        let p = problem(3.0, 0.5, 1.0, 1.5);
        for rho in density_cubic_roots(&p).unwrap() {
            let psi = plane_wave_state(&p, rho).unwrap();
            assert!(stationary_residual(&p, psi) < 1e-10 * p.pump_amplitude.max(1.0));
            assert!((psi.norm_sqr() - rho).abs() < 1e-10 * rho.max(1.0));
        }
        let degenerate = problem(2.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            plane_wave_state(&degenerate, 2.0),
            Err(Error::DegenerateRoot { .. })
        ));
    }

    #[test]
    fn branch_continuation_and_fold() {
        let p = problem(3.0, 0.5, 1.0, 0.0);
        let grid: Vec<f64> = (0..400).map(|i| 1e-6 + i as f64 * 0.01).collect();
        let curve = physical_branch(&p, &grid, FoldPolicy::Jump).unwrap();
        let lin = grid[0].powi(2) / (9.0 + 0.25);
        assert!((curve.rho[0] - lin).abs() < 1e-6 * lin);
        assert!(curve.rho.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(curve.folds.len(), 1);
        assert_eq!(curve.transitions.len(), 2);
        let (before, _) = curve.folds[0];
        // jump happens at the upper edge of the bistable window
        let last3 = curve.transitions[1].p0_before;
        assert_eq!(before, last3);
        assert!(matches!(
            physical_branch(&p, &grid, FoldPolicy::Error),
            Err(Error::BranchFold { .. })
        ));
        assert!(physical_branch(&p, &[0.2, 0.1], FoldPolicy::Jump).is_err());
    }

    #[test]
    fn response_at_zero_k_is_i() {
        let q = ResponseQuery {
            k: [0.0, 0.0],
            velocity: [0.0, 1.0],
            mu: 1.0,
            gamma: 1.0,
            pump: C64::new(1.0, 0.0),
            kinetic: KineticSpec::curvature_default(),
        };
        let r = bogoliubov_response(&q).unwrap();
        assert!((r - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn resonance_detected() {
        // γ = 0, v = 0, k = 0 gives a vanishing denominator
        let q = ResponseQuery {
            k: [0.0, 0.0],
            velocity: [0.0, 0.0],
            mu: 1.0,
            gamma: 0.0,
            pump: C64::new(1.0, 0.0),
            kinetic: KineticSpec::ConstantMass { mass: 1.0 },
        };
        assert!(matches!(bogoliubov_response(&q), Err(Error::Resonance { .. })));
        let grid = Grid::new_2d(8, 8, 10.0, 10.0).unwrap();
        let map = response_map(&grid, &q).unwrap();
        assert_eq!(map.masked_count(), 1);
        assert!(map.masked[4 * 8 + 4]);
    }

    #[test]
    fn radially_symmetric_without_velocity() {
        let grid = Grid::new_2d(32, 32, 20.0, 20.0).unwrap();
        let q = ResponseQuery {
            k: [0.0; 2],
            velocity: [0.0, 0.0],
            mu: 1.0,
            gamma: 1.0,
            pump: C64::new(1.0, 0.0),
            kinetic: KineticSpec::curvature_default(),
        };
        let map = response_map(&grid, &q).unwrap();
        assert_eq!(map.masked_count(), 0);
        // (kx, ky) ↔ (ky, kx) and sign flips leave |k| unchanged
        for iy in 1..32 {
            for ix in 1..32 {
                let a = map.magnitude[iy * 32 + ix];
                let b = map.magnitude[ix * 32 + iy];
                let c = map.magnitude[(32 - iy) * 32 + (32 - ix)];
                assert!((a - b).abs() < 1e-14 * a.max(1.0));
                assert!((a - c).abs() < 1e-14 * a.max(1.0));
            }
        }
    }
}
