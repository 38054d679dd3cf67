//! TOML experiment configuration. Every physical key carries its unit in the
//! key name; unknown keys are rejected.

use std::path::Path;

use polariton_core::dispersion::{
    fit_power_to_curvature, CavityForm, CavityParams, KineticSpec, KineticSymbol, CALIBRATED_RABI,
    DEFAULT_EXCITON_ENERGY,
};
use polariton_core::dynamics::{
    gaussian_field, EvolveOptions, IntegratorOptions, ModelParams, PotentialSpec, PumpProfile, PumpSpec, SplittingOrder,
};
use polariton_core::presets;
use polariton_core::spectral::{Grid, Space, SpectralField};
use polariton_core::units::mass_from_electron_masses;
use polariton_core::C64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Window `(0, k]` on which the default fractional coefficient is fitted.
pub const FRACTIONAL_FIT_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub cavity: CavityConfig,
    pub kinetic: KineticConfig,
    pub model: ModelConfig,
    pub pump: PumpConfig,
    pub potential: PotentialConfig,
    pub run: RunConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
    pub planewave: PlaneWaveConfig,
    pub response: ResponseConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub lx_um: f64,
    pub ly_um: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dim: 2,
            nx: presets::GRID_POINTS,
            ny: presets::GRID_POINTS,
            lx_um: presets::BOX_LENGTH,
            ly_um: presets::BOX_LENGTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CavityFormName {
    Paraxial,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityConfig {
    pub exciton_energy_mev: f64,
    pub cavity_energy_mev: f64,
    pub photon_mass_me: f64,
    pub exciton_mass_me: f64,
    pub rabi_mev: f64,
    pub form: CavityFormName,
}

impl Default for CavityConfig {
    fn default() -> Self {
        CavityConfig {
            exciton_energy_mev: DEFAULT_EXCITON_ENERGY,
            cavity_energy_mev: DEFAULT_EXCITON_ENERGY,
            photon_mass_me: 1e-4,
            exciton_mass_me: 0.5,
            rabi_mev: CALIBRATED_RABI,
            form: CavityFormName::Paraxial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KineticModelName {
    Curvature,
    ConstantMass,
    Fractional,
    Tabulated,
}

impl KineticModelName {
    pub fn label(self) -> &'static str {
        match self {
            KineticModelName::Curvature => "curvature",
            KineticModelName::ConstantMass => "constant-mass",
            KineticModelName::Fractional => "fractional",
            KineticModelName::Tabulated => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KineticConfig {
    pub model: KineticModelName,
    pub prefactor_half: bool,
    /// Constant-mass value; matched to the branch bottom when absent.
    pub mass_me: Option<f64>,
    pub fractional_s: f64,
    /// Fitted to the curvature symbol near the bottom when absent.
    pub fractional_coefficient_mev_um2s: Option<f64>,
    pub table_k_per_um: Vec<f64>,
    pub table_g_mev: Vec<f64>,
}

impl Default for KineticConfig {
    fn default() -> Self {
        KineticConfig {
            model: KineticModelName::Curvature,
            prefactor_half: true,
            mass_me: None,
            fractional_s: 5.0 / 6.0,
            fractional_coefficient_mev_um2s: None,
            table_k_per_um: Vec::new(),
            table_g_mev: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub alpha_mev_um2: f64,
    pub gamma_per_ps: f64,
    pub eta: f64,
    pub omega_mev: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            alpha_mev_um2: presets::ALPHA,
            gamma_per_ps: presets::DAMPING_GAMMA,
            eta: presets::ETA,
            omega_mev: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpProfileName {
    Off,
    Homogeneous,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyReference {
    /// `energy_mev` is the pump energy ħω_i.
    Absolute,
    /// `energy_mev` is a detuning from g(|k_i|) of the model being run.
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub profile: PumpProfileName,
    pub amplitude_mev: f64,
    pub width_um: f64,
    pub center_um: [f64; 2],
    pub k_i_per_um: [f64; 2],
    pub energy_mev: f64,
    pub energy_reference: EnergyReference,
}

impl Default for PumpConfig {
    fn default() -> Self {
        PumpConfig {
            profile: PumpProfileName::Gaussian,
            amplitude_mev: presets::DAMPING_PUMP_AMPLITUDE,
            width_um: presets::DAMPING_PUMP_WIDTH,
            center_um: [0.0, 0.0],
            k_i_per_um: [0.0, 0.0],
            energy_mev: presets::DAMPING_PUMP_ENERGY,
            energy_reference: EnergyReference::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    None,
    Harmonic,
    MexicanHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    pub strength_mev_per_um2: f64,
    pub hat_amplitude_mev: f64,
    pub hat_width_um: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            kind: PotentialKind::Harmonic,
            strength_mev_per_um2: presets::TRAP_STRENGTH,
            hat_amplitude_mev: presets::HAT_AMPLITUDE,
            hat_width_um: presets::HAT_WIDTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingName {
    LocalKineticLocal,
    KineticLocalKinetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialName {
    Gaussian,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t_final_ps: f64,
    pub dt_ps: f64,
    pub local_substeps: usize,
    pub splitting: SplittingName,
    /// Time-series sampling interval in steps.
    pub record_stride: usize,
    /// Write a snapshot every this many samples; 0 writes only the final state.
    pub snapshot_every_samples: usize,
    pub watchdog_max_abs: f64,
    pub initial: InitialName,
    pub initial_width_um: f64,
    pub initial_amplitude: f64,
    /// Standard deviation of complex Gaussian noise added to the initial field
    /// (drawn from `--seed`).
    pub noise_amplitude: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_final_ps: presets::DAMPING_DURATION,
            dt_ps: presets::DT,
            local_substeps: 1,
            splitting: SplittingName::LocalKineticLocal,
            record_stride: 10,
            snapshot_every_samples: 0,
            watchdog_max_abs: 1e6,
            initial: InitialName::Gaussian,
            initial_width_um: 1.0,
            initial_amplitude: 1.0,
            noise_amplitude: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub radial_bins: usize,
    pub png: bool,
    pub dispersion_k_max_per_um: f64,
    pub dispersion_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            radial_bins: 100,
            png: false,
            dispersion_k_max_per_um: 5.0,
            dispersion_samples: 501,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Pump wavevector magnitudes along the diagonal, `k_i = (a, a)/√2`.
    pub a_values_per_um: Vec<f64>,
    /// Kinetic models to run at every point; the [kinetic] model when empty.
    pub models: Vec<KineticModelName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldPolicyName {
    Jump,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlaneWaveConfig {
    pub kappa_per_um: f64,
    pub p0_max_mev: f64,
    pub p0_samples: usize,
    pub fold_policy: FoldPolicyName,
}

impl Default for PlaneWaveConfig {
    fn default() -> Self {
        PlaneWaveConfig {
            kappa_per_um: 2.0,
            p0_max_mev: 1.0,
            p0_samples: 401,
            fold_policy: FoldPolicyName::Jump,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResponseConfig {
    pub k_max_per_um: f64,
    pub points: usize,
    pub velocity_um_per_ps: [f64; 2],
    pub mu_mev: f64,
    pub gamma_per_ps: f64,
    /// Complex pump amplitude as `[re, im]`.
    pub pump: [f64; 2],
}

impl Default for ResponseConfig {
    fn default() -> Self {
        ResponseConfig {
            k_max_per_um: 5.0,
            points: 128,
            velocity_um_per_ps: [0.0, 1.0],
            mu_mev: 1.0,
            gamma_per_ps: 1.0,
            pump: [1.0, 0.0],
        }
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The effective configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = &self.grid;
        let lx = positive("grid.lx_um", g.lx_um)?;
        let built = match g.dim {
            1 => Grid::new_1d(g.nx, lx),
            2 => Grid::new_2d(g.nx, g.ny, lx, positive("grid.ly_um", g.ly_um)?),
            d => return Err(invalid("grid.dim", format!("must be 1 or 2, got {d}"))),
        };
        built.map_err(|e| invalid("grid", e))
    }

    pub fn cavity(&self) -> Result<CavityParams, CliError> {
        let c = &self.cavity;
        let p = CavityParams {
            exciton_energy: positive("cavity.exciton_energy_mev", c.exciton_energy_mev)?,
            cavity_offset: finite("cavity.cavity_energy_mev", c.cavity_energy_mev)?,
            photon_mass: mass_from_electron_masses(positive("cavity.photon_mass_me", c.photon_mass_me)?),
            exciton_mass: mass_from_electron_masses(positive("cavity.exciton_mass_me", c.exciton_mass_me)?),
            rabi: positive("cavity.rabi_mev", c.rabi_mev)?,
            form: match c.form {
                CavityFormName::Paraxial => CavityForm::Paraxial,
                CavityFormName::Exact => CavityForm::Exact,
            },
        };
        p.validate().map_err(|e| invalid("cavity", e))?;
        Ok(p)
    }

    /// Fractional coefficient from the config, or the best uniform fit near
    /// the branch bottom.
    pub fn fractional_coefficient(&self) -> Result<f64, CliError> {
        match self.kinetic.fractional_coefficient_mev_um2s {
            Some(c) => finite("kinetic.fractional_coefficient_mev_um2s", c),
            None => {
                let (c, _) =
                    fit_power_to_curvature(&self.cavity()?, self.kinetic.fractional_s, FRACTIONAL_FIT_WINDOW, 500)
                        .map_err(|e| invalid("kinetic.fractional_s", e))?;
                let scale = if self.kinetic.prefactor_half { 1.0 } else { 2.0 };
                Ok(c * scale)
            }
        }
    }

    pub fn kinetic_for(&self, model: KineticModelName) -> Result<KineticSpec, CliError> {
        let k = &self.kinetic;
        let scale = if k.prefactor_half { 1.0 } else { 0.5 };
        let spec = match model {
            KineticModelName::Curvature => KineticSpec::LowerBranchCurvature {
                params: self.cavity()?,
                prefactor_half: k.prefactor_half,
            },
            KineticModelName::ConstantMass => {
                let mass = match k.mass_me {
                    Some(m) => mass_from_electron_masses(positive("kinetic.mass_me", m)?),
                    None => match KineticSpec::constant_mass_matching(&self.cavity()?) {
                        KineticSpec::ConstantMass { mass } => mass * scale,
                        _ => unreachable!(),
                    },
                };
                KineticSpec::ConstantMass { mass }
            }
            KineticModelName::Fractional => KineticSpec::FractionalPower {
                s: k.fractional_s,
                coefficient: self.fractional_coefficient()?,
            },
            KineticModelName::Tabulated => KineticSpec::Tabulated {
                k_nodes: k.table_k_per_um.clone(),
                g_values: k.table_g_mev.clone(),
            },
        };
        spec.validate().map_err(|e| invalid("kinetic", e))?;
        Ok(spec)
    }

    pub fn kinetic(&self) -> Result<KineticSpec, CliError> {
        self.kinetic_for(self.kinetic.model)
    }

    pub fn potential(&self) -> Result<PotentialSpec, CliError> {
        let p = &self.potential;
        Ok(match p.kind {
            PotentialKind::None => PotentialSpec::None,
            PotentialKind::Harmonic => PotentialSpec::Harmonic {
                strength: finite("potential.strength_mev_per_um2", p.strength_mev_per_um2)?,
            },
            PotentialKind::MexicanHat => PotentialSpec::MexicanHat {
                strength: finite("potential.strength_mev_per_um2", p.strength_mev_per_um2)?,
                hat_amplitude: finite("potential.hat_amplitude_mev", p.hat_amplitude_mev)?,
                hat_width: positive("potential.hat_width_um", p.hat_width_um)?,
            },
        })
    }

    /// Pump for a given kinetic symbol and wavevector.
    pub fn pump(&self, kinetic: &KineticSpec, k_i: [f64; 2]) -> Result<PumpSpec, CliError> {
        let p = &self.pump;
        let amplitude = finite("pump.amplitude_mev", p.amplitude_mev)?;
        if amplitude < 0.0 {
            return Err(invalid("pump.amplitude_mev", "must be nonnegative"));
        }
        let profile = match p.profile {
            PumpProfileName::Off => return Ok(PumpSpec::off()),
            PumpProfileName::Homogeneous => PumpProfile::Homogeneous { amplitude },
            PumpProfileName::Gaussian => PumpProfile::Gaussian {
                amplitude,
                center: p.center_um,
                width: positive("pump.width_um", p.width_um)?,
            },
        };
        let energy = finite("pump.energy_mev", p.energy_mev)?;
        let frequency = match p.energy_reference {
            EnergyReference::Absolute => energy,
            EnergyReference::Resonant => {
                let symbol = KineticSymbol::new(kinetic).map_err(|e| invalid("kinetic", e))?;
                energy
                    + symbol
                        .eval(k_i[0].hypot(k_i[1]))
                        .map_err(|e| invalid("pump.k_i_per_um", e))?
            }
        };
        Ok(PumpSpec {
            profile,
            wavevector: [finite("pump.k_i_per_um", k_i[0])?, finite("pump.k_i_per_um", k_i[1])?],
            frequency,
        })
    }

    /// Model parameters for a kinetic model and pump wavevector.
    pub fn model_params_for(&self, model: KineticModelName, k_i: [f64; 2]) -> Result<ModelParams, CliError> {
        let kinetic = self.kinetic_for(model)?;
        let m = &self.model;
        let gamma = finite("model.gamma_per_ps", m.gamma_per_ps)?;
        let eta = finite("model.eta", m.eta)?;
        if gamma < 0.0 || eta < 0.0 {
            return Err(invalid("model", "gamma_per_ps and eta must be nonnegative"));
        }
        let params = ModelParams {
            alpha: finite("model.alpha_mev_um2", m.alpha_mev_um2)?,
            gamma,
            eta,
            omega: finite("model.omega_mev", m.omega_mev)?,
            pump: self.pump(&kinetic, k_i)?,
            potential: self.potential()?,
            kinetic,
        };
        params.validate().map_err(|e| invalid("model", e))?;
        Ok(params)
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        self.model_params_for(self.kinetic.model, self.pump.k_i_per_um)
    }

    pub fn evolve_options(&self) -> Result<(f64, f64, EvolveOptions), CliError> {
        let r = &self.run;
        let t = positive("run.t_final_ps", r.t_final_ps)?;
        let dt = positive("run.dt_ps", r.dt_ps)?;
        if r.local_substeps == 0 {
            return Err(invalid("run.local_substeps", "must be at least 1"));
        }
        if r.record_stride == 0 {
            return Err(invalid("run.record_stride", "must be at least 1"));
        }
        let options = EvolveOptions {
            integrator: IntegratorOptions {
                local_substeps: r.local_substeps,
                order: match r.splitting {
                    SplittingName::LocalKineticLocal => SplittingOrder::LocalKineticLocal,
                    SplittingName::KineticLocalKinetic => SplittingOrder::KineticLocalKinetic,
                },
            },
            record_stride: r.record_stride,
            watchdog_max_abs: positive("run.watchdog_max_abs", r.watchdog_max_abs)?,
        };
        Ok((t, dt, options))
    }

    /// Initial field, with seeded complex Gaussian noise when requested.
    pub fn initial_field(&self, grid: Grid, seed: u64) -> Result<SpectralField, CliError> {
        let r = &self.run;
        let mut field = match r.initial {
            InitialName::Gaussian => gaussian_field(
                grid,
                [0.0, 0.0],
                positive("run.initial_width_um", r.initial_width_um)?,
                finite("run.initial_amplitude", r.initial_amplitude)?,
            ),
            InitialName::Zero => SpectralField::zeros(grid, Space::Real),
        };
        let sd = finite("run.noise_amplitude", r.noise_amplitude)?;
        if sd < 0.0 {
            return Err(invalid("run.noise_amplitude", "must be nonnegative"));
        }
        if sd > 0.0 {
            let mut rng = StdRng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sd).expect("valid deviation");
            for v in field.values.iter_mut() {
                *v += C64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
        Ok(field)
    }
}
