//! Documented default parameter sets for the reference experiments.
//!
//! Every run uses a 256² grid on a 50 μm box, α = 0.005 meV·μm², η = 0.01,
//! ω = 0, a Gaussian pump centred at the origin and the initial field
//! `exp(−(x² + y²))`. The pump wavevector is `k_i = (a, a)/√2`.
//!
//! | run     | potential                       | γ (ps⁻¹) | pump A, σ    | ħω_i (meV)       | T (ps) |
//! |---------|---------------------------------|----------|--------------|------------------|--------|
//! | damping | harmonic κ = 0.1                | 0.1      | 0.05, 5 μm   | 0.3              | 150    |
//! | sweep   | none                            | 0.4      | 0.2, 0.75 μm | g(a) (resonant)  | 50     |
//! | ring    | κ = 0.1, hat 2 meV × 1 μm       | 0.1      | 0.05, 5 μm   | 0.5              | 100    |

use crate::dispersion::{CavityParams, KineticSpec, KineticSymbol};
use crate::dynamics::{
    gaussian_field, EvolveOptions, IntegratorOptions, ModelParams, PotentialSpec, PumpProfile, PumpSpec, SimState,
};
use crate::spectral::Grid;
use crate::Result;

pub const GRID_POINTS: usize = 256;
pub const BOX_LENGTH: f64 = 50.0;
pub const ALPHA: f64 = 0.005;
pub const ETA: f64 = 0.01;
pub const DT: f64 = 0.025;
pub const TRAP_STRENGTH: f64 = 0.1;

pub const DAMPING_GAMMA: f64 = 0.1;
pub const DAMPING_PUMP_AMPLITUDE: f64 = 0.05;
pub const DAMPING_PUMP_WIDTH: f64 = 5.0;
pub const DAMPING_PUMP_ENERGY: f64 = 0.3;
pub const DAMPING_DURATION: f64 = 150.0;

pub const SWEEP_GAMMA: f64 = 0.4;
pub const SWEEP_PUMP_AMPLITUDE: f64 = 0.2;
pub const SWEEP_PUMP_WIDTH: f64 = 0.75;
/// Pump energy relative to `g(|k_i|)` of the model being run.
pub const SWEEP_PUMP_DETUNING: f64 = 0.0;
pub const SWEEP_DURATION: f64 = 50.0;
pub const SWEEP_VALUES: [f64; 5] = [0.0, 2.6, 5.2, 7.8, 10.38];

pub const RING_GAMMA: f64 = 0.1;
pub const RING_PUMP_AMPLITUDE: f64 = 0.05;
pub const RING_PUMP_WIDTH: f64 = 5.0;
pub const RING_PUMP_ENERGY: f64 = 0.5;
pub const HAT_AMPLITUDE: f64 = 2.0;
pub const HAT_WIDTH: f64 = 1.0;
pub const RING_DURATION: f64 = 100.0;
pub const RING_VALUES: [f64; 2] = [0.0, 10.38];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KineticModel {
    /// Velocity dependent mass from the lower-branch curvature.
    Curvature,
    /// Constant mass matched to the bottom of the lower branch.
    ConstantMass,
}

impl KineticModel {
    pub fn spec(self) -> KineticSpec {
        match self {
            KineticModel::Curvature => KineticSpec::curvature_default(),
            KineticModel::ConstantMass => KineticSpec::constant_mass_matching(&CavityParams::default()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KineticModel::Curvature => "curvature",
            KineticModel::ConstantMass => "constant-mass",
        }
    }
}

/// A complete, ready-to-evolve experiment.
#[derive(Debug, Clone)]
pub struct Preset {
    pub grid: Grid,
    pub params: ModelParams,
    pub initial: SimState,
    pub t_final: f64,
    pub dt: f64,
    pub options: EvolveOptions,
}

/// `k_i = (a, a)/√2`, so that `|k_i| = a`.
pub fn pump_wavevector_diagonal(a: f64) -> [f64; 2] {
    let c = a * std::f64::consts::FRAC_1_SQRT_2;
    [c, c]
}

struct Setup {
    potential: PotentialSpec,
    gamma: f64,
    amplitude: f64,
    width: f64,
    a: f64,
    pump_energy: f64,
    t_final: f64,
}

fn build(model: KineticModel, s: Setup) -> Result<Preset> {
    let grid = Grid::new_2d(GRID_POINTS, GRID_POINTS, BOX_LENGTH, BOX_LENGTH)?;
    let mut params = ModelParams::free(model.spec());
    params.alpha = ALPHA;
    params.gamma = s.gamma;
    params.eta = ETA;
    params.potential = s.potential;
    params.pump = PumpSpec {
        profile: PumpProfile::Gaussian {
            amplitude: s.amplitude,
            center: [0.0, 0.0],
            width: s.width,
        },
        wavevector: pump_wavevector_diagonal(s.a),
        frequency: s.pump_energy,
    };
    params.validate()?;
    let initial = SimState::new(gaussian_field(grid, [0.0, 0.0], 1.0, 1.0), 0.0)?;
    Ok(Preset {
        grid,
        params,
        initial,
        t_final: s.t_final,
        dt: DT,
        options: EvolveOptions {
            integrator: IntegratorOptions {
                local_substeps: 1,
                ..Default::default()
            },
            record_stride: 10,
            watchdog_max_abs: 1e6,
        },
    })
}

/// Trapped run with a pump at normal incidence; M(t) settles to a plateau.
pub fn damping_run(model: KineticModel) -> Result<Preset> {
    build(
        model,
        Setup {
            potential: PotentialSpec::Harmonic {
                strength: TRAP_STRENGTH,
            },
            gamma: DAMPING_GAMMA,
            amplitude: DAMPING_PUMP_AMPLITUDE,
            width: DAMPING_PUMP_WIDTH,
            a: 0.0,
            pump_energy: DAMPING_PUMP_ENERGY,
            t_final: DAMPING_DURATION,
        },
    )
}

/// One point of the pump-wavevector sweep: a narrow spot pumped on
/// resonance with the model's own `g(|k_i|)`, no external potential.
pub fn sweep_point(model: KineticModel, a: f64) -> Result<Preset> {
    let g = KineticSymbol::new(&model.spec())?.eval(a)?;
    build(
        model,
        Setup {
            potential: PotentialSpec::None,
            gamma: SWEEP_GAMMA,
            amplitude: SWEEP_PUMP_AMPLITUDE,
            width: SWEEP_PUMP_WIDTH,
            a,
            pump_energy: g + SWEEP_PUMP_DETUNING,
            t_final: SWEEP_DURATION,
        },
    )
}

/// Trap with a repulsive core, producing ring-shaped condensates.
pub fn ring_run(model: KineticModel, a: f64) -> Result<Preset> {
    build(
        model,
        Setup {
            potential: PotentialSpec::MexicanHat {
                strength: TRAP_STRENGTH,
                hat_amplitude: HAT_AMPLITUDE,
                hat_width: HAT_WIDTH,
            },
            gamma: RING_GAMMA,
            amplitude: RING_PUMP_AMPLITUDE,
            width: RING_PUMP_WIDTH,
            a,
            pump_energy: RING_PUMP_ENERGY,
            t_final: RING_DURATION,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for model in [KineticModel::Curvature, KineticModel::ConstantMass] {
            let p = damping_run(model).unwrap();
            assert_eq!(p.grid.len(), GRID_POINTS * GRID_POINTS);
            assert!(p.grid.k_max() > 10.38);
            for a in SWEEP_VALUES {
                let s = sweep_point(model, a).unwrap();
                let k = s.params.pump.wavevector;
                assert!((k[0].hypot(k[1]) - a).abs() < 1e-12);
            }
            ring_run(model, 10.38).unwrap();
        }
    }

    #[test]
    fn sweep_pump_is_resonant() {
        let s = sweep_point(KineticModel::ConstantMass, 2.6).unwrap();
        let g = KineticSymbol::new(&s.params.kinetic).unwrap().eval(2.6).unwrap();
        assert_eq!(s.params.pump.frequency, g);
    }
}
