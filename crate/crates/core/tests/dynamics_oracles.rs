use polariton_core::analytic::{density_cubic_roots, plane_wave_state, PlaneWaveProblem};
use polariton_core::dispersion::{CavityParams, KineticSpec};
use polariton_core::dynamics::{
    evolve, gaussian_field, EvolveOptions, Integrator, IntegratorOptions, ModelParams, PotentialSpec, PumpProfile,
    PumpSpec, SimState, SplittingOrder,
};
use polariton_core::observables::{mass_balance_residual, total_mass};
use polariton_core::spectral::{Grid, Space, SpectralField};
use polariton_core::units::HBAR;
use polariton_core::C64;

fn constant_mass() -> KineticSpec {
    KineticSpec::constant_mass_matching(&CavityParams::default())
}

fn l2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn l2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn run(initial: &SimState, params: &ModelParams, t: f64, dt: f64, order: SplittingOrder) -> SimState {
    let opts = EvolveOptions {
        integrator: IntegratorOptions {
            order,
            ..Default::default()
        },
        record_stride: 1_000_000,
        ..Default::default()
    };
    evolve(initial, params, t, dt, opts, |_| {}).unwrap().state
}

#[test]
fn free_gaussian_spreads_exactly() {
    // iħψ_t = K ψ with K = k²/(2m): ψ = (1 + 4iaDt)^{-1/2} exp(−a x²/(1 + 4iaDt)), D = 1/(2mħ)
    let kin = constant_mass();
    let KineticSpec::ConstantMass { mass } = kin else {
        unreachable!()
    };
    let grid = Grid::new_1d(512, 120.0).unwrap();
    let w = 2.0;
    let a = 1.0 / (w * w);
    let d = 1.0 / (2.0 * mass * HBAR);
    let params = ModelParams::free(kin);
    let init = SimState::new(gaussian_field(grid, [0.0, 0.0], w, 1.0), 0.0).unwrap();
    let t = 12.0;
    let out = run(&init, &params, t, 0.05, SplittingOrder::LocalKineticLocal);
    let z = C64::new(1.0, 4.0 * a * d * t);
    let exact = SpectralField::from_fn(grid, |x, _| (-(x * x) * a / z).exp() / z.sqrt());
    let err = l2_diff(&out.field.values, &exact.values) / l2(&exact.values);
    assert!(err < 1e-10, "err {err:e}");
}

#[test]
fn relaxation_damps_each_mode_at_its_own_rate() {
    let kin = constant_mass();
    let KineticSpec::ConstantMass { mass } = kin else {
        unreachable!()
    };
    let grid = Grid::new_1d(64, 20.0).unwrap();
    let mut params = ModelParams::free(kin);
    params.eta = 0.05;
    let m = 3;
    let init = SimState::new(SpectralField::plane_wave(grid, m, 0), 0.0).unwrap();
    let t = 5.0;
    let out = run(&init, &params, t, 0.1, SplittingOrder::LocalKineticLocal);
    let k = grid.kx(m as usize);
    let g = k * k / (2.0 * mass);
    let factor = C64::new(-params.eta * g * t / HBAR, -g * t / HBAR).exp();
    let exact: Vec<C64> = init.field.values.iter().map(|v| v * factor).collect();
    assert!(l2_diff(&out.field.values, &exact) / l2(&exact) < 1e-12);
}

fn pumped_1d() -> (SimState, ModelParams) {
    let grid = Grid::new_1d(256, 40.0).unwrap();
    let mut params = ModelParams::free(KineticSpec::curvature_default());
    params.alpha = 0.5;
    params.gamma = 0.1;
    params.eta = 0.01;
    params.potential = PotentialSpec::Harmonic { strength: 0.05 };
    params.pump = PumpSpec {
        profile: PumpProfile::Gaussian {
            amplitude: 0.8,
            center: [1.0, 0.0],
            width: 3.0,
        },
        wavevector: [0.6, 0.0],
        frequency: 0.2,
    };
    let init = SimState::new(gaussian_field(grid, [-1.0, 0.0], 2.0, 1.2), 0.0).unwrap();
    (init, params)
}

fn strang_slope(order: SplittingOrder) -> f64 {
    let (init, params) = pumped_1d();
    let t = 0.5;
    let reference = run(&init, &params, t, 5e-5, order);
    let dts = [4e-3, 2e-3, 1e-3];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| l2_diff(&run(&init, &params, t, dt, order).field.values, &reference.field.values))
        .collect();
    let xs: Vec<f64> = dts.iter().map(|d: &f64| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn strang_splitting_is_second_order() {
    for order in [SplittingOrder::LocalKineticLocal, SplittingOrder::KineticLocalKinetic] {
        let slope = strang_slope(order);
        assert!((1.9..=2.1).contains(&slope), "{order:?} slope {slope}");
    }
}

#[test]
fn plane_wave_root_is_a_fixed_point() {
    let grid = Grid::new_2d(32, 32, 20.0, 20.0).unwrap();
    let kin = KineticSpec::curvature_default();
    let kappa = grid.kx(3);
    let (alpha, gamma, p0) = (0.05, 0.2, 0.4);
    let pump_energy = 0.3;
    let prob = PlaneWaveProblem::new(kappa, pump_energy, p0, alpha, gamma, 0.0, &kin).unwrap();
    let rho = density_cubic_roots(&prob).unwrap()[0];
    let psi0 = plane_wave_state(&prob, rho).unwrap();
    let mut params = ModelParams::free(kin);
    params.alpha = alpha;
    params.gamma = gamma;
    params.pump = PumpSpec {
        profile: PumpProfile::Homogeneous { amplitude: p0 },
        wavevector: [kappa, 0.0],
        frequency: pump_energy,
    };
    let field = SpectralField::from_fn(grid, |x, _| psi0 * C64::from_polar(1.0, kappa * x));
    let init = SimState::new(field, 0.0).unwrap();
    let m0 = total_mass(&init.field);
    let out = run(&init, &params, 0.1, 1e-3, SplittingOrder::LocalKineticLocal);
    let drift = ((total_mass(&out.field) - m0) / m0).abs();
    assert!(drift < 1e-4, "drift {drift:e}");
    let rotated: Vec<C64> = init
        .field
        .values
        .iter()
        .map(|v| v * C64::from_polar(1.0, -pump_energy / HBAR * out.time))
        .collect();
    assert!(l2_diff(&out.field.values, &rotated) / l2(&rotated) < 1e-6);
}

#[test]
fn mass_balance_residual_is_second_order() {
    let (init, params) = pumped_1d();
    let warm = run(&init, &params, 0.5, 1e-3, SplittingOrder::LocalKineticLocal);
    let r1 = mass_balance_residual(&warm, &params, 2e-3).unwrap();
    let r2 = mass_balance_residual(&warm, &params, 1e-3).unwrap();
    let exponent = (r1 / r2).log2();
    assert!(exponent >= 1.8, "exponent {exponent} ({r1:e} → {r2:e})");
}

#[test]
fn galilean_boost_for_constant_mass() {
    let kin = constant_mass();
    let KineticSpec::ConstantMass { mass } = kin else {
        unreachable!()
    };
    let grid = Grid::new_1d(512, 100.0).unwrap();
    let mut params = ModelParams::free(kin);
    params.alpha = 0.3;
    params.gamma = 0.05;
    let k0 = grid.kx(8);
    let e0 = k0 * k0 / (2.0 * mass);
    let v = k0 / (mass * HBAR);
    let base = gaussian_field(grid, [0.0, 0.0], 2.0, 1.0);
    let boosted = SpectralField::from_fn(grid, |x, _| {
        C64::new((-(x * x) / 4.0).exp(), 0.0) * C64::from_polar(1.0, k0 * x)
    });
    let t = 4.0;
    let a = run(
        &SimState::new(base, 0.0).unwrap(),
        &params,
        t,
        0.01,
        SplittingOrder::LocalKineticLocal,
    );
    let b = run(
        &SimState::new(boosted, 0.0).unwrap(),
        &params,
        t,
        0.01,
        SplittingOrder::LocalKineticLocal,
    );
    // b(x, t) = a(x − vt, t) e^{i(k₀x − E₀t/ħ)}, with the shift applied spectrally
    let plan = polariton_core::spectral::SpectralPlan::new(grid);
    let mut shifted = plan.forward(&a.field).unwrap();
    for (idx, c) in shifted.values.iter_mut().enumerate() {
        *c *= C64::from_polar(1.0, -grid.wavevector(idx)[0] * v * t);
    }
    let shifted = plan.inverse(&shifted).unwrap();
    let expected: Vec<C64> = shifted
        .values
        .iter()
        .enumerate()
        .map(|(i, s)| s * C64::from_polar(1.0, k0 * grid.position(i)[0] - e0 * t / HBAR))
        .collect();
    let err = l2_diff(&b.field.values, &expected) / l2(&expected);
    assert!(err < 1e-6, "err {err:e}");
}

#[test]
fn curvature_kinetics_break_galilean_invariance() {
    let grid = Grid::new_1d(256, 60.0).unwrap();
    let params = ModelParams::free(KineticSpec::curvature_default());
    let k0 = grid.kx(6);
    let base = gaussian_field(grid, [0.0, 0.0], 2.0, 1.0);
    let boosted = SpectralField::from_fn(grid, |x, _| base_value(x) * C64::from_polar(1.0, k0 * x));
    let a = run(
        &SimState::new(base, 0.0).unwrap(),
        &params,
        5.0,
        0.05,
        SplittingOrder::LocalKineticLocal,
    );
    let b = run(
        &SimState::new(boosted, 0.0).unwrap(),
        &params,
        5.0,
        0.05,
        SplittingOrder::LocalKineticLocal,
    );
    // the boosted packet changes shape: compare density widths
    let width = |f: &SpectralField| {
        let m: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
        let c: f64 = f
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| grid.x(i) * v.norm_sqr())
            .sum::<f64>()
            / m;
        (f.values
            .iter()
            .enumerate()
            .map(|(i, v)| (grid.x(i) - c).powi(2) * v.norm_sqr())
            .sum::<f64>()
            / m)
            .sqrt()
    };
    assert!((width(&a.field) - width(&b.field)).abs() > 1e-3);
}

fn base_value(x: f64) -> C64 {
    C64::new((-(x * x) / 4.0).exp(), 0.0)
}

#[test]
fn integrator_rejects_fourier_state() {
    let grid = Grid::new_1d(16, 4.0).unwrap();
    let params = ModelParams::free(constant_mass());
    let integ = Integrator::new(grid, &params, 0.01, IntegratorOptions::default()).unwrap();
    let mut s = SimState {
        field: SpectralField::zeros(grid, Space::Fourier),
        time: 0.0,
    };
    assert!(integ.step(&mut s).is_err());
}
