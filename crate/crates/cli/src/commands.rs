//! Subcommand implementations. Each writes its files under an output
//! directory and returns a short human-readable report.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use polariton_core::analytic::{physical_branch, response_map, FoldPolicy, PlaneWaveProblem, ResponseQuery};
use polariton_core::dispersion::{
    branch_energies, cavity_energy, exciton_energy, first_inflection, fit_power_to_curvature, inverse_effective_mass,
    KineticSymbol,
};
use polariton_core::dynamics::evolve;
use polariton_core::observables::{density_phase, radial_profile, ring_radius, second_moment, write_map_csv};
use polariton_core::presets::pump_wavevector_diagonal;
use polariton_core::spectral::{write_snapshot, Grid};
use polariton_core::C64;
use rayon::prelude::*;

use crate::checks;
use crate::config::{EnergyReference, ExperimentConfig, FoldPolicyName, KineticModelName, FRACTIONAL_FIT_WINDOW};
use crate::raster::write_png;
use crate::CliError;

/// Models compared side by side by `planewave` and `response`.
pub const COMPARED_MODELS: [KineticModelName; 2] = [KineticModelName::Curvature, KineticModelName::ConstantMass];

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn echo_config(cfg: &ExperimentConfig, out: &Path, seed: u64) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let mut w = create(&out.join("config.toml"))?;
    writeln!(w, "# effective configuration; noise seed {seed}")?;
    w.write_all(cfg.to_toml().as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_summary(path: &Path, entries: &[(String, String)]) -> Result<(), CliError> {
    let mut w = create(path)?;
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Branch energies, kinetic symbols and inverse mass on a uniform k grid.
pub fn dispersion(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let cavity = cfg.cavity()?;
    let n = cfg.output.dispersion_samples;
    if n < 2 {
        return Err(CliError::Config("output.dispersion_samples: must be at least 2".into()));
    }
    let k_max = cfg.output.dispersion_k_max_per_um;
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(CliError::Config(format!(
            "output.dispersion_k_max_per_um: must be positive, got {k_max}"
        )));
    }
    let mut fractional_cfg = cfg.clone();
    fractional_cfg.kinetic.fractional_s = 5.0 / 6.0;
    let symbols = [
        cfg.kinetic_for(KineticModelName::Curvature)?,
        cfg.kinetic_for(KineticModelName::ConstantMass)?,
        fractional_cfg.kinetic_for(KineticModelName::Fractional)?,
    ]
    .iter()
    .map(KineticSymbol::new)
    .collect::<Result<Vec<_>, _>>()?;

    fs::create_dir_all(out)?;
    let mut w = create(&out.join("dispersion.csv"))?;
    writeln!(
        w,
        "k_per_um,E_L_mev,E_U_mev,E_c_mev,E_x_mev,g_curvature_mev,g_constmass_mev,g_fractional_mev,inverse_mass_mev_um2"
    )?;
    for i in 0..n {
        let k = k_max * i as f64 / (n - 1) as f64;
        let (el, eu) = branch_energies(k, &cavity);
        write!(
            w,
            "{k:.9e},{el:.12e},{eu:.12e},{:.12e},{:.12e}",
            cavity_energy(k, &cavity),
            exciton_energy(k, &cavity)
        )?;
        for s in &symbols {
            write!(w, ",{:.12e}", s.eval(k)?)?;
        }
        writeln!(w, ",{:.12e}", inverse_effective_mass(k, &cavity))?;
    }
    w.flush()?;

    let k_inf = first_inflection(&cavity, k_max)?;
    let coefficient = fractional_cfg.fractional_coefficient()?;
    let (_, fit_err) = fit_power_to_curvature(&cavity, 5.0 / 6.0, FRACTIONAL_FIT_WINDOW, 500)?;
    write_summary(
        &out.join("summary.txt"),
        &[
            kv("k_inf_per_um", format!("{k_inf:.6}")),
            kv("rabi_mev", cavity.rabi),
            kv("fractional_coefficient_mev_um2s", coefficient),
            kv("fractional_fit_max_relative_error", format!("{fit_err:.6e}")),
            kv("samples", n),
        ],
    )?;
    Ok(format!(
        "k_inf = {k_inf:.6} 1/um; {n} samples written to {}",
        out.join("dispersion.csv").display()
    ))
}

/// Final-state summary of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSummary {
    pub model: KineticModelName,
    pub k_i: [f64; 2],
    pub steps: u64,
    pub final_time: f64,
    pub final_mass: f64,
    pub max_abs: f64,
    pub ring_radius: Option<f64>,
    pub no_ring: bool,
    pub second_moment: f64,
}

/// Runs one evolution and writes its files into `dir`.
pub fn evolve_point(
    cfg: &ExperimentConfig,
    model: KineticModelName,
    k_i: [f64; 2],
    dir: &Path,
    seed: u64,
) -> Result<EvolveSummary, CliError> {
    let grid = cfg.grid()?;
    let params = cfg.model_params_for(model, k_i)?;
    let (t_final, dt, options) = cfg.evolve_options()?;
    let initial = polariton_core::dynamics::SimState::new(cfg.initial_field(grid, seed)?, 0.0)?;
    let every = cfg.run.snapshot_every_samples;
    fs::create_dir_all(dir)?;
    let snap_dir = dir.join("snapshots");
    if every > 0 {
        fs::create_dir_all(&snap_dir)?;
    }

    let mut sample = 0usize;
    let mut write_error: Option<std::io::Error> = None;
    let evolution = evolve(&initial, &params, t_final, dt, options, |state| {
        if every > 0 && sample.is_multiple_of(every) && write_error.is_none() {
            let path = snap_dir.join(format!("snap_{sample:06}.pfqm"));
            let result = File::create(&path).map_err(polariton_core::Error::from).and_then(|f| {
                let mut w = BufWriter::new(f);
                write_snapshot(&mut w, &state.field, state.time)?;
                w.flush()?;
                Ok(())
            });
            if let Err(e) = result {
                write_error = Some(std::io::Error::other(e.to_string()));
            }
        }
        sample += 1;
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }

    let mut w = create(&dir.join("series.csv"))?;
    evolution.series.write_csv(&mut w)?;
    w.flush()?;
    let state = &evolution.state;
    let mut w = create(&dir.join("final.pfqm"))?;
    write_snapshot(&mut w, &state.field, state.time)?;
    w.flush()?;

    let dp = density_phase(&state.field)?;
    let mut w = create(&dir.join("density.csv"))?;
    write_map_csv(&dp.density, &grid, &mut w)?;
    w.flush()?;
    let mass = evolution
        .series
        .channel("M")
        .and_then(|m| m.last().copied())
        .unwrap_or(0.0);
    let max_abs = evolution
        .series
        .channel("max_abs_psi")
        .and_then(|m| m.last().copied())
        .unwrap_or(0.0);
    let mut summary = EvolveSummary {
        model,
        k_i,
        steps: evolution.steps,
        final_time: state.time,
        final_mass: mass,
        max_abs,
        ring_radius: None,
        no_ring: false,
        second_moment: second_moment(&dp.density, &grid),
    };
    if grid.dim() == 2 {
        let profile = radial_profile(&dp.density, &grid, [0.0, 0.0], cfg.output.radial_bins)?;
        let mut w = create(&dir.join("radial.csv"))?;
        profile.write_csv(&mut w)?;
        w.flush()?;
        let ring = ring_radius(&profile);
        summary.ring_radius = Some(ring.radius);
        summary.no_ring = ring.no_ring;
        if cfg.output.png {
            write_png(&dp.density, grid.nx(), grid.ny(), &dir.join("density.png"))?;
        }
    }

    let mut entries = vec![
        kv("kinetic_model", model.label()),
        kv("k_i_per_um", format!("[{}, {}]", k_i[0], k_i[1])),
        kv("pump_energy_mev", params.pump.frequency),
        kv("steps", summary.steps),
        kv("final_time_ps", summary.final_time),
        kv("final_mass", format!("{:.12e}", summary.final_mass)),
        kv("max_abs_psi", format!("{:.12e}", summary.max_abs)),
        kv("second_moment_um2", format!("{:.12e}", summary.second_moment)),
    ];
    if let Some(r) = summary.ring_radius {
        entries.push(kv("ring_radius_um", format!("{r:.6}")));
        entries.push(kv("no_ring", summary.no_ring));
    }
    write_summary(&dir.join("summary.txt"), &entries)?;
    Ok(summary)
}

fn point_dir(out: &Path, model: KineticModelName, a: f64) -> PathBuf {
    out.join(format!("{}_a{a}", model.label()))
}

/// Single run, or a sweep over diagonal pump wavevectors when
/// `sweep.a_values_per_um` is set (points run concurrently).
pub fn evolve_command(cfg: &ExperimentConfig, out: &Path, seed: u64) -> Result<String, CliError> {
    cfg.evolve_options()?;
    cfg.grid()?;
    echo_config(cfg, out, seed)?;
    if cfg.sweep.a_values_per_um.is_empty() {
        let s = evolve_point(cfg, cfg.kinetic.model, cfg.pump.k_i_per_um, out, seed)?;
        return Ok(describe(&s));
    }
    let models = if cfg.sweep.models.is_empty() {
        vec![cfg.kinetic.model]
    } else {
        cfg.sweep.models.clone()
    };
    let points: Vec<(KineticModelName, f64)> = models
        .iter()
        .flat_map(|&m| cfg.sweep.a_values_per_um.iter().map(move |&a| (m, a)))
        .collect();
    for &(m, a) in &points {
        cfg.model_params_for(m, pump_wavevector_diagonal(a))?;
    }
    let results: Vec<Result<EvolveSummary, CliError>> = points
        .par_iter()
        .map(|&(m, a)| evolve_point(cfg, m, pump_wavevector_diagonal(a), &point_dir(out, m, a), seed))
        .collect();
    let mut w = create(&out.join("sweep.csv"))?;
    writeln!(
        w,
        "kinetic_model,a_per_um,final_mass,ring_radius_um,no_ring,second_moment_um2"
    )?;
    let mut lines = Vec::new();
    for (&(m, a), r) in points.iter().zip(results) {
        let s = r?;
        let ring = s.ring_radius.map(|r| format!("{r:.6}")).unwrap_or_default();
        writeln!(
            w,
            "{},{a},{:.12e},{ring},{},{:.12e}",
            m.label(),
            s.final_mass,
            s.no_ring,
            s.second_moment
        )?;
        lines.push(format!("a = {a}: {}", describe(&s)));
    }
    w.flush()?;
    Ok(lines.join("\n"))
}

fn describe(s: &EvolveSummary) -> String {
    let ring = match s.ring_radius {
        Some(_) if s.no_ring => ", no ring".to_string(),
        Some(r) => format!(", ring radius {r:.3} um"),
        None => String::new(),
    };
    format!(
        "{}: M = {:.6e} after {} steps (t = {} ps), second moment {:.4} um^2{ring}",
        s.model.label(),
        s.final_mass,
        s.steps,
        s.final_time,
        s.second_moment
    )
}

/// Physical plane-wave branch over a P₀ sweep for both compared models.
pub fn planewave(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let pw = &cfg.planewave;
    if pw.p0_samples < 2 || !(pw.p0_max_mev > 0.0 && pw.p0_max_mev.is_finite()) {
        return Err(CliError::Config(
            "planewave: need p0_samples >= 2 and p0_max_mev > 0".into(),
        ));
    }
    if !pw.kappa_per_um.is_finite() {
        return Err(CliError::Config("planewave.kappa_per_um: must be finite".into()));
    }
    let p0: Vec<f64> = (0..pw.p0_samples)
        .map(|i| pw.p0_max_mev * i as f64 / (pw.p0_samples - 1) as f64)
        .collect();
    let policy = match pw.fold_policy {
        FoldPolicyName::Jump => FoldPolicy::Jump,
        FoldPolicyName::Error => FoldPolicy::Error,
    };
    fs::create_dir_all(out)?;
    let mut report = Vec::new();
    for model in COMPARED_MODELS {
        let params = cfg.model_params_for(model, [pw.kappa_per_um, 0.0])?;
        let pump_energy = match cfg.pump.energy_reference {
            EnergyReference::Absolute => cfg.pump.energy_mev,
            EnergyReference::Resonant => params.pump.frequency,
        };
        let prob = PlaneWaveProblem::new(
            pw.kappa_per_um,
            pump_energy,
            0.0,
            params.alpha,
            params.gamma,
            params.omega,
            &params.kinetic,
        )
        .map_err(|e| CliError::Config(format!("planewave: {e}")))?;
        let curve = physical_branch(&prob, &p0, policy)?;
        let mut w = create(&out.join(format!("planewave_{}.csv", model.label())))?;
        writeln!(w, "p0_mev,rho,psi_re,psi_im,root_count")?;
        for i in 0..curve.p0.len() {
            writeln!(
                w,
                "{:.9e},{:.12e},{:.12e},{:.12e},{}",
                curve.p0[i], curve.rho[i], curve.psi[i].re, curve.psi[i].im, curve.root_counts[i]
            )?;
        }
        w.flush()?;
        report.push(format!(
            "{}: g(kappa) = {:.6} meV, rho(P0 max) = {:.6e}, {} fold(s), {} root-count change(s)",
            model.label(),
            prob.g_at_kappa,
            curve.rho.last().copied().unwrap_or(0.0),
            curve.folds.len(),
            curve.transitions.len()
        ));
    }
    Ok(report.join("\n"))
}

/// k-space lattice of `points²` nodes reaching `±k_max`.
pub fn response_grid(points: usize, k_max: f64) -> Result<Grid, CliError> {
    if points < 2 || !points.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "response.points: must be even and >= 2, got {points}"
        )));
    }
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(CliError::Config(format!(
            "response.k_max_per_um: must be positive, got {k_max}"
        )));
    }
    let l = std::f64::consts::PI * points as f64 / k_max;
    Grid::new_2d(points, points, l, l).map_err(|e| CliError::Config(format!("response: {e}")))
}

/// Linear-response maps for both compared models on one lattice.
pub fn response(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let r = &cfg.response;
    let grid = response_grid(r.points, r.k_max_per_um)?;
    if !(r.gamma_per_ps >= 0.0 && r.mu_mev.is_finite()) {
        return Err(CliError::Config(
            "response: gamma_per_ps must be nonnegative and mu_mev finite".into(),
        ));
    }
    fs::create_dir_all(out)?;
    let mut maps = Vec::new();
    let mut report = Vec::new();
    for model in COMPARED_MODELS {
        let template = ResponseQuery {
            k: [0.0, 0.0],
            velocity: r.velocity_um_per_ps,
            mu: r.mu_mev,
            gamma: r.gamma_per_ps,
            pump: C64::new(r.pump[0], r.pump[1]),
            kinetic: cfg.kinetic_for(model)?,
        };
        let map = response_map(&grid, &template)?;
        let mut w = create(&out.join(format!("response_{}.csv", model.label())))?;
        map.write_csv(&mut w)?;
        w.flush()?;
        if cfg.output.png {
            write_png(
                &map.magnitude,
                grid.nx(),
                grid.ny(),
                &out.join(format!("response_{}.png", model.label())),
            )?;
        }
        report.push(format!(
            "{}: {} masked resonant node(s)",
            model.label(),
            map.masked_count()
        ));
        maps.push(map);
    }
    let both: Vec<(f64, f64)> = maps[0]
        .magnitude
        .iter()
        .zip(&maps[1].magnitude)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    let diff = both.iter().map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm = both.iter().map(|(_, b)| b * b).sum::<f64>().sqrt();
    report.push(format!("relative L2 difference {:.6e}", diff / norm));
    Ok(report.join("\n"))
}

/// Runs the invariant suite, printing one line per check; true iff all pass.
pub fn selftest(mut sink: impl Write) -> Result<bool, CliError> {
    let mut all = true;
    for check in checks::selftest_suite() {
        writeln!(sink, "{check}")?;
        all &= check.passed;
    }
    Ok(all)
}
