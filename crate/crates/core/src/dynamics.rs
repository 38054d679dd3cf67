//! Time-splitting Fourier pseudospectral integrator for
//!
//! ```text
//! iħ ∂ψ/∂t = (1 − iη) K ψ + [α|ψ|² + V(r) + ω] ψ − iħ(γ/2) ψ + i P(r, t)
//! P(r, t)  = P₀(r) e^{i k_i·r} e^{−i ω_i t/ħ}
//! ```
//!
//! where `K` is the kinetic Fourier multiplier with symbol `g(|k|)` (meV).
//! Energies (`α|ψ|²`, `V`, `ω`, `ω_i`, `g`) are meV, `γ` is ps⁻¹ and the pump
//! amplitude is meV·(field units); everything is divided by ħ here.
//!
//! The kinetic sub-flow is exact in k-space. The local sub-flow is exact when
//! the pump is off; otherwise each node is integrated with fixed-step RK4 in
//! the interaction picture of its linear part (potential, ω and loss), so
//! steep potentials do not limit the step.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::{KineticSpec, KineticSymbol};
use crate::observables::{self, TimeSeries};
use crate::spectral::{inner_product, multiplier_table, Grid, Space, SpectralField, SpectralPlan};
use crate::units::HBAR;
use crate::{Error, Result, C64};

/// Spatial envelope `P₀(r)` of the coherent pump, in meV·(field units).
#[derive(Debug, Clone, PartialEq)]
pub enum PumpProfile {
    Homogeneous {
        amplitude: f64,
    },
    /// `A exp(−|r − d|²/σ²)`.
    Gaussian {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpec {
    pub profile: PumpProfile,
    /// In-plane pump wavevector `k_i` (μm⁻¹).
    pub wavevector: [f64; 2],
    /// Pump energy `ħω_i` (meV).
    pub frequency: f64,
}

impl PumpSpec {
    pub fn off() -> Self {
        PumpSpec {
            profile: PumpProfile::Homogeneous { amplitude: 0.0 },
            wavevector: [0.0, 0.0],
            frequency: 0.0,
        }
    }

    pub fn is_off(&self) -> bool {
        match self.profile {
            PumpProfile::Homogeneous { amplitude } | PumpProfile::Gaussian { amplitude, .. } => amplitude == 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.profile {
            PumpProfile::Homogeneous { amplitude } => amplitude >= 0.0,
            PumpProfile::Gaussian { amplitude, width, .. } => amplitude >= 0.0 && width > 0.0,
        };
        if ok && self.frequency.is_finite() && self.wavevector.iter().all(|k| k.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid pump {self:?}")))
        }
    }

    /// `P₀(r) e^{i k_i·r}` at a point (meV·field units).
    pub fn envelope(&self, x: f64, y: f64) -> C64 {
        let amp = match self.profile {
            PumpProfile::Homogeneous { amplitude } => amplitude,
            PumpProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                amplitude * (-r2 / (width * width)).exp()
            }
        };
        C64::from_polar(amp, self.wavevector[0] * x + self.wavevector[1] * y)
    }

    /// Full pump `P(r, t)`.
    pub fn at(&self, x: f64, y: f64, t: f64) -> C64 {
        self.envelope(x, y) * C64::from_polar(1.0, -self.frequency / HBAR * t)
    }
}

/// Static external potential in meV.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    None,
    /// `κ r²`.
    Harmonic {
        strength: f64,
    },
    /// `κ r² + A_V exp(−r²/σ_V²)`: a trap with a narrow repulsive core.
    MexicanHat {
        strength: f64,
        hat_amplitude: f64,
        hat_width: f64,
    },
    /// One value per grid node, row-major.
    Tabulated(Vec<f64>),
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            PotentialSpec::None => true,
            PotentialSpec::Harmonic { strength } => *strength >= 0.0,
            PotentialSpec::MexicanHat {
                strength,
                hat_width,
                hat_amplitude,
            } => *strength >= 0.0 && *hat_width > 0.0 && hat_amplitude.is_finite(),
            PotentialSpec::Tabulated(v) => v.iter().all(|x| x.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid potential {self:?}")))
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        match self {
            PotentialSpec::None | PotentialSpec::Tabulated(_) => 0.0,
            PotentialSpec::Harmonic { strength } => strength * r2,
            PotentialSpec::MexicanHat {
                strength,
                hat_amplitude,
                hat_width,
            } => strength * r2 + hat_amplitude * (-r2 / (hat_width * hat_width)).exp(),
        }
    }

    /// Samples the potential on every node of `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            PotentialSpec::Tabulated(v) if v.len() != grid.len() => Err(Error::GridMismatch(format!(
                "tabulated potential has {} values for {} nodes",
                v.len(),
                grid.len()
            ))),
            PotentialSpec::Tabulated(v) => Ok(v.clone()),
            _ => Ok((0..grid.len())
                .map(|i| {
                    let [x, y] = grid.position(i);
                    self.value(x, y)
                })
                .collect()),
        }
    }
}

/// Coefficients of the driven dissipative model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Self-interaction α in meV·μm^d.
    pub alpha: f64,
    /// Loss rate γ in ps⁻¹ (the field decays as e^{−γt/2}).
    pub gamma: f64,
    /// Energy relaxation η, multiplies the kinetic term only.
    pub eta: f64,
    /// Branch-bottom offset ω in meV.
    pub omega: f64,
    pub kinetic: KineticSpec,
    pub pump: PumpSpec,
    pub potential: PotentialSpec,
}

impl ModelParams {
    /// Conservative, undriven constant-mass model; a starting point for tests.
    pub fn free(kinetic: KineticSpec) -> Self {
        ModelParams {
            alpha: 0.0,
            gamma: 0.0,
            eta: 0.0,
            omega: 0.0,
            kinetic,
            pump: PumpSpec::off(),
            potential: PotentialSpec::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.eta >= 0.0 && self.alpha.is_finite() && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need γ ≥ 0, η ≥ 0 and finite α, ω (γ={}, η={}, α={}, ω={})",
                self.gamma, self.eta, self.alpha, self.omega
            )));
        }
        self.kinetic.validate()?;
        self.pump.validate()?;
        self.potential.validate()
    }
}

/// Condensate field at a time (ps).
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub field: SpectralField,
    pub time: f64,
}

impl SimState {
    pub fn new(field: SpectralField, time: f64) -> Result<Self> {
        field.expect_space(Space::Real)?;
        Ok(SimState { field, time })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplittingOrder {
    /// half local, full kinetic, half local
    #[default]
    LocalKineticLocal,
    /// half kinetic, full local, half kinetic
    KineticLocalKinetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// RK4 substeps per local sub-flow when the pump is on.
    pub local_substeps: usize,
    pub order: SplittingOrder,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            local_substeps: 4,
            order: SplittingOrder::LocalKineticLocal,
        }
    }
}

/// Per-node factors `exp(−i(1 − iη) g(|k|) dt/ħ)` in k-space storage order.
///
/// With η > 0 the modulus is `exp(−η g dt/ħ)`: damping where `g > 0`, growth
/// where `g < 0` (above the inflection point of the curvature symbol).
pub fn kinetic_phase_table(grid: &Grid, params: &ModelParams, dt: f64) -> Result<Vec<C64>> {
    let symbol = KineticSymbol::new(&params.kinetic)?;
    let g = multiplier_table(grid, |k| symbol.eval(k))?;
    Ok(kinetic_factors(&g, params.eta, dt, 1.0))
}

fn kinetic_factors(g: &[f64], eta: f64, dt: f64, scale: f64) -> Vec<C64> {
    let z = C64::new(-eta, -1.0) * (dt / HBAR);
    g.iter().map(|&gk| (z * gk).exp() * scale).collect()
}

/// Precomputed split-step propagator for one grid, parameter set and time step.
#[derive(Debug, Clone)]
pub struct Integrator {
    plan: SpectralPlan,
    dt: f64,
    gamma: f64,
    /// `α/ħ` in ps⁻¹·μm^d
    alpha: f64,
    /// `(V + ω)/ħ` per node
    local_freq: Vec<f64>,
    /// `P₀ e^{ik·r}/ħ` per node (field units per ps)
    source: Vec<C64>,
    pump_freq: f64,
    pump_on: bool,
    /// kinetic symbol g(|k|) in meV per k-slot
    symbol: Vec<f64>,
    eta: f64,
    /// kinetic factors for the full and half step, with 1/N folded in
    kin_full: Vec<C64>,
    kin_half: Vec<C64>,
    /// `e^{(iw + γ/2)h/2}` per node for the substep of the default local step
    local_half: Vec<C64>,
    options: IntegratorOptions,
}

impl Integrator {
    pub fn new(grid: Grid, params: &ModelParams, dt: f64, options: IntegratorOptions) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        if options.local_substeps == 0 {
            return Err(Error::InvalidParameter("local_substeps must be ≥ 1".into()));
        }
        let sym = KineticSymbol::new(&params.kinetic)?;
        let symbol = multiplier_table(&grid, |k| sym.eval(k))?;
        let potential = params.potential.sample(&grid)?;
        let local_freq: Vec<f64> = potential.iter().map(|v| (v + params.omega) / HBAR).collect();
        let source = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.position(i);
                params.pump.envelope(x, y) / HBAR
            })
            .collect();
        let n_inv = 1.0 / grid.len() as f64;
        let h = default_local_tau(dt, options.order) / options.local_substeps as f64;
        let local_half = interaction_factors(&local_freq, params.gamma, h);
        Ok(Integrator {
            plan: SpectralPlan::new(grid),
            dt,
            gamma: params.gamma,
            alpha: params.alpha / HBAR,
            local_freq,
            source,
            pump_freq: params.pump.frequency / HBAR,
            pump_on: !params.pump.is_off(),
            kin_full: kinetic_factors(&symbol, params.eta, dt, n_inv),
            kin_half: kinetic_factors(&symbol, params.eta, 0.5 * dt, n_inv),
            symbol,
            eta: params.eta,
            local_half,
            options,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.plan.grid()
    }

    pub fn plan(&self) -> &SpectralPlan {
        &self.plan
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Kinetic symbol `g(|k|)` (meV) per k-space slot.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// One Strang step of length `dt`, advancing `state.time`.
    pub fn step(&self, state: &mut SimState) -> Result<()> {
        state.field.expect_space(Space::Real)?;
        if state.field.grid != *self.grid() {
            return Err(Error::GridMismatch("state grid differs from integrator grid".into()));
        }
        let t = state.time;
        let h = 0.5 * self.dt;
        let psi = &mut state.field.values;
        match self.options.order {
            SplittingOrder::LocalKineticLocal => {
                self.local_flow(psi, t, h)?;
                self.kinetic_flow(psi, &self.kin_full);
                self.local_flow(psi, t + h, h)?;
            }
            SplittingOrder::KineticLocalKinetic => {
                self.kinetic_flow(psi, &self.kin_half);
                self.local_flow(psi, t, self.dt)?;
                self.kinetic_flow(psi, &self.kin_half);
            }
        }
        state.time = t + self.dt;
        Ok(())
    }

    fn kinetic_flow(&self, psi: &mut [C64], factors: &[C64]) {
        self.plan.forward_in_place(psi);
        psi.par_iter_mut().zip(factors.par_iter()).for_each(|(v, f)| *v *= f);
        self.plan.inverse_unscaled_in_place(psi);
    }

    /// Integrates `∂ψ/∂t = −i[(α|ψ|² + V + ω)/ħ]ψ − (γ/2)ψ + P(r,t)/ħ` pointwise
    /// from `t` to `t + tau`.
    pub fn local_flow(&self, psi: &mut [C64], t: f64, tau: f64) -> Result<()> {
        let (alpha, gamma) = (self.alpha, self.gamma);
        if !self.pump_on {
            let decay = (-0.5 * gamma * tau).exp();
            // ∫₀^τ e^{−γs} ds
            let weight = if gamma * tau < 1e-8 {
                tau * (1.0 - 0.5 * gamma * tau)
            } else {
                -(-gamma * tau).exp_m1() / gamma
            };
            psi.par_iter_mut().zip(self.local_freq.par_iter()).for_each(|(v, &w)| {
                let theta = w * tau + alpha * v.norm_sqr() * weight;
                *v *= C64::from_polar(decay, -theta);
            });
        } else {
            let n = self.options.local_substeps;
            let h = tau / n as f64;
            // pump phases at the RK4 stage times of every substep
            let phases: Vec<[C64; 3]> = (0..n)
                .map(|j| {
                    let t0 = t + j as f64 * h;
                    [0.0, 0.5 * h, h].map(|s| C64::from_polar(1.0, -self.pump_freq * (t0 + s)))
                })
                .collect();
            let fresh;
            let halves = if tau == default_local_tau(self.dt, self.options.order) {
                &self.local_half
            } else {
                fresh = interaction_factors(&self.local_freq, gamma, h);
                &fresh
            };
            psi.par_iter_mut()
                .zip(self.source.par_iter().zip(halves.par_iter()))
                .for_each(|(v, (&src, &half))| {
                    // interaction picture u = e^{(iw + γ/2)s} ψ: the linear part
                    // is exact, RK4 only sees the nonlinearity and the pump
                    let mut base = C64::new(1.0, 0.0);
                    let mut u = *v;
                    for e in &phases {
                        let ef = [base, base * half, base * half * half];
                        let rhs = |u: C64, m: usize| -> C64 {
                            let damp = 1.0 / ef[m].norm_sqr();
                            C64::new(0.0, -alpha * damp * u.norm_sqr()) * u + src * e[m] * ef[m]
                        };
                        let k1 = rhs(u, 0);
                        let k2 = rhs(u + k1 * (0.5 * h), 1);
                        let k3 = rhs(u + k2 * (0.5 * h), 1);
                        let k4 = rhs(u + k3 * h, 2);
                        u += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
                        base = ef[2];
                    }
                    *v = u / base;
                });
        }
        if let Some(node) = psi.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { node, time: t + tau });
        }
        Ok(())
    }

    /// `K ψ` in real space.
    pub fn apply_kinetic(&self, psi: &[C64]) -> Vec<C64> {
        let mut buf = psi.to_vec();
        self.plan.forward_in_place(&mut buf);
        let n_inv = 1.0 / buf.len() as f64;
        buf.iter_mut().zip(&self.symbol).for_each(|(v, g)| *v *= g * n_inv);
        self.plan.inverse_unscaled_in_place(&mut buf);
        buf
    }

    /// `⟨ψ, Kψ⟩` in meV·(field units)²·μm^d. Real because `K` is self-adjoint.
    pub fn kinetic_expectation(&self, psi: &[C64]) -> f64 {
        // Parseval: Σ g |ψ̂|² ΔA / N
        let mut buf = psi.to_vec();
        self.plan.forward_in_place(&mut buf);
        let s: f64 = buf.iter().zip(&self.symbol).map(|(v, g)| g * v.norm_sqr()).sum();
        s * self.grid().cell_area() / buf.len() as f64
    }

    /// `Re⟨ψ, P(t)⟩/ħ`, the pump injection rate contribution.
    pub fn pump_overlap(&self, psi: &[C64], t: f64) -> f64 {
        if !self.pump_on {
            return 0.0;
        }
        let e = C64::from_polar(1.0, -self.pump_freq * t);
        (inner_product(psi, &self.source, self.grid().cell_area()) * e).re
    }

    /// Right-hand side of the mass balance law
    /// `dM/dt = −(2η/ħ)⟨ψ,Kψ⟩ + (2/ħ)Re⟨ψ,P⟩ − γM`.
    pub fn balance_rhs(&self, psi: &[C64], t: f64) -> f64 {
        let m = observables::total_mass_values(psi, self.grid());
        let kin = if self.eta != 0.0 {
            self.kinetic_expectation(psi)
        } else {
            0.0
        };
        -2.0 * self.eta / HBAR * kin + 2.0 * self.pump_overlap(psi, t) - self.gamma * m
    }
}

/// One Strang step with a freshly built [`Integrator`].
pub fn step_strang(state: &SimState, params: &ModelParams, dt: f64) -> Result<SimState> {
    let integ = Integrator::new(state.field.grid, params, dt, IntegratorOptions::default())?;
    let mut next = state.clone();
    integ.step(&mut next)?;
    Ok(next)
}

fn default_local_tau(dt: f64, order: SplittingOrder) -> f64 {
    match order {
        SplittingOrder::LocalKineticLocal => 0.5 * dt,
        SplittingOrder::KineticLocalKinetic => dt,
    }
}

fn interaction_factors(local_freq: &[f64], gamma: f64, h: f64) -> Vec<C64> {
    let r = (0.25 * gamma * h).exp();
    local_freq.iter().map(|&w| C64::from_polar(r, 0.5 * w * h)).collect()
}

/// Local sub-flow over `dt` with default options.
pub fn local_step(values: &mut [C64], grid: &Grid, params: &ModelParams, t: f64, dt: f64) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch("values do not match grid".into()));
    }
    let integ = Integrator::new(*grid, params, dt, IntegratorOptions::default())?;
    integ.local_flow(values, t, dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub integrator: IntegratorOptions,
    /// Record a time-series sample (and call the observer) every this many steps.
    pub record_stride: usize,
    /// Abort once max|ψ| exceeds this value.
    pub watchdog_max_abs: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            integrator: IntegratorOptions::default(),
            record_stride: 10,
            watchdog_max_abs: 1e6,
        }
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: SimState,
    pub series: TimeSeries,
    pub steps: u64,
}

/// Channel names of the recorded time series.
pub const SERIES_CHANNELS: [&str; 4] = ["M", "max_abs_psi", "kinetic_expectation", "balance_residual"];

/// Evolves `initial` to `t_final` with repeated Strang steps.
///
/// The step count is `ceil((t_final − t₀)/dt)` and the step is shrunk to land
/// exactly on `t_final`. The observer sees the state at step 0, every
/// `record_stride` steps, and at the end. The time series carries M,
/// max|ψ|, ⟨ψ,Kψ⟩ and the mass-balance residual at those instants; the
/// residual uses a centered difference of M (one-sided three-point at the
/// two ends).
pub fn evolve(
    initial: &SimState,
    params: &ModelParams,
    t_final: f64,
    dt: f64,
    options: EvolveOptions,
    mut observer: impl FnMut(&SimState),
) -> Result<Evolution> {
    let t0 = initial.time;
    if !(t_final > t0) {
        return Err(Error::InvalidParameter(format!(
            "t_final = {t_final} must exceed the initial time {t0}"
        )));
    }
    if !(dt > 0.0) || options.record_stride == 0 {
        return Err(Error::InvalidParameter("dt and record_stride must be positive".into()));
    }
    initial.field.expect_space(Space::Real)?;
    let span = t_final - t0;
    let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let dt = span / steps as f64;
    let integ = Integrator::new(initial.field.grid, params, dt, options.integrator)?;
    let grid = initial.field.grid;

    let mut state = initial.clone();
    let mut masses: Vec<f64> = Vec::with_capacity(steps as usize + 1);
    struct Pending {
        step: u64,
        time: f64,
        m: f64,
        max_abs: f64,
        kin: f64,
        rhs: f64,
    }
    let mut pending: Vec<Pending> = Vec::new();
    let record = |state: &SimState, step: u64, pending: &mut Vec<Pending>| {
        let psi = &state.field.values;
        pending.push(Pending {
            step,
            time: state.time,
            m: observables::total_mass_values(psi, &grid),
            max_abs: observables::max_abs(psi),
            kin: integ.kinetic_expectation(psi),
            rhs: integ.balance_rhs(psi, state.time),
        });
    };

    masses.push(observables::total_mass_values(&state.field.values, &grid));
    record(&state, 0, &mut pending);
    observer(&state);
    for i in 1..=steps {
        integ.step(&mut state)?;
        state.time = t0 + i as f64 * dt;
        let max_abs = observables::max_abs(&state.field.values);
        if !(max_abs <= options.watchdog_max_abs) {
            return Err(Error::Watchdog {
                time: state.time,
                max_abs,
                threshold: options.watchdog_max_abs,
                step: i,
            });
        }
        masses.push(observables::total_mass_values(&state.field.values, &grid));
        if i % options.record_stride as u64 == 0 || i == steps {
            record(&state, i, &mut pending);
            observer(&state);
        }
    }

    let mut series = TimeSeries::new(&SERIES_CHANNELS);
    let last = steps as usize;
    for p in pending {
        let n = p.step as usize;
        let dmdt = if last < 2 {
            (masses[last] - masses[0]) / (last as f64 * dt)
        } else if n == 0 {
            (-3.0 * masses[0] + 4.0 * masses[1] - masses[2]) / (2.0 * dt)
        } else if n == last {
            (3.0 * masses[n] - 4.0 * masses[n - 1] + masses[n - 2]) / (2.0 * dt)
        } else {
            (masses[n + 1] - masses[n - 1]) / (2.0 * dt)
        };
        series.push(p.time, &[p.m, p.max_abs, p.kin, (dmdt - p.rhs).abs()])?;
    }
    Ok(Evolution { state, series, steps })
}

/// Gaussian `exp(−((x−x₀)² + (y−y₀)²)/w²)` on a grid, the reference initial condition.
pub fn gaussian_field(grid: Grid, center: [f64; 2], width: f64, amplitude: f64) -> SpectralField {
    SpectralField::from_fn(grid, |x, y| {
        let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
        Complex64::new(amplitude * (-r2 / (width * width)).exp(), 0.0)
    })
}
