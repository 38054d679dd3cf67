use polariton_core::dispersion::{KineticSpec, KineticSymbol};
use polariton_core::spectral::{fractional_laplacian, inner_product, Grid, Space, SpectralField, SpectralPlan};
use polariton_core::C64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn grids() -> [Grid; 2] {
    [
        Grid::new_1d(256, 40.0).unwrap(),
        Grid::new_2d(128, 128, 30.0, 30.0).unwrap(),
    ]
}

fn random_field(grid: Grid, seed: u64) -> SpectralField {
    let mut rng = StdRng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    SpectralField::new(grid, values, Space::Real).unwrap()
}

fn smooth_field(grid: Grid, seed: u64) -> SpectralField {
    let mut rng = StdRng::seed_from_u64(seed);
    let c = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    let w: f64 = rng.random_range(1.5..3.0);
    let k = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
    let y_on = if grid.dim() == 2 { 1.0 } else { 0.0 };
    SpectralField::from_fn(grid, |x, y| {
        let r2 = (x - c[0]).powi(2) + y_on * (y - c[1]).powi(2);
        C64::from_polar((-r2 / (w * w)).exp(), k[0] * x + y_on * k[1] * y)
    })
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn curvature_symbol() -> KineticSymbol {
    KineticSymbol::new(&KineticSpec::curvature_default()).unwrap()
}

fn plane_wave_error(grid: Grid, mx: i64, my: i64) -> f64 {
    let plan = SpectralPlan::new(grid);
    let sym = curvature_symbol();
    let pw = SpectralField::plane_wave(grid, mx, my);
    let idx = grid.mode_index(mx, my);
    let [kx, ky] = grid.wavevector(idx);
    let kabs = kx.hypot(ky);
    let out = plan.apply_multiplier(&pw, |k| sym.eval(k)).unwrap();
    let lambda = sym.eval(kabs).unwrap();
    let expected: Vec<C64> = pw.values.iter().map(|v| v * lambda).collect();
    diff_norm(&out.values, &expected) / norm(&expected)
}

#[test]
fn plane_waves_are_eigenfunctions() {
    for grid in grids() {
        let modes: &[(i64, i64)] = if grid.dim() == 1 {
            &[(1, 0), (-3, 0), (17, 0), (-60, 0), (127, 0)]
        } else {
            &[(1, 0), (0, -2), (5, 7), (-30, 12), (63, -63)]
        };
        for &(mx, my) in modes {
            let err = plane_wave_error(grid, mx, my);
            assert!(err < 1e-12, "dim {} mode ({mx},{my}) err {err:e}", grid.dim());
        }
    }
}

#[test]
fn laplacian_matches_dense_dft_matrix() {
    let n = 32;
    let l = 7.0;
    let grid = Grid::new_1d(n, l).unwrap();
    let f = smooth_field(grid, 11);
    let out = fractional_laplacian(&f, 1.0).unwrap();
    let mut reference = vec![C64::new(0.0, 0.0); n];
    for (j, r) in reference.iter_mut().enumerate() {
        for (m, fm) in f.values.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for q in 0..n {
                let mode = if q < n / 2 { q as f64 } else { q as f64 - n as f64 };
                let k = 2.0 * std::f64::consts::PI * mode / l;
                let phase = 2.0 * std::f64::consts::PI * (q * (j + n - m) % n) as f64 / n as f64;
                s += C64::from_polar(k * k, phase);
            }
            *r += s * fm / n as f64;
        }
    }
    let err = diff_norm(&out.values, &reference) / norm(&reference);
    assert!(err < 1e-11, "err {err:e}");
}

#[test]
fn shift_commutes_with_multiplier() {
    let grid = Grid::new_2d(64, 32, 20.0, 10.0).unwrap();
    let plan = SpectralPlan::new(grid);
    let sym = curvature_symbol();
    let f = random_field(grid, 5);
    let (sx, sy) = (9, 4);
    let shift = |v: &[C64]| -> Vec<C64> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for iy in 0..ny {
            for ix in 0..nx {
                out[((iy + sy) % ny) * nx + (ix + sx) % nx] = v[iy * nx + ix];
            }
        }
        out
    };
    let a = shift(&plan.apply_multiplier(&f, |k| sym.eval(k)).unwrap().values);
    let shifted = SpectralField::new(grid, shift(&f.values), Space::Real).unwrap();
    let b = plan.apply_multiplier(&shifted, |k| sym.eval(k)).unwrap().values;
    assert!(diff_norm(&a, &b) / norm(&a) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn round_trip_is_identity(seed in any::<u64>()) {
        for grid in grids() {
            let plan = SpectralPlan::new(grid);
            let f = random_field(grid, seed);
            let back = plan.inverse(&plan.forward(&f).unwrap()).unwrap();
            let err = diff_norm(&back.values, &f.values) / norm(&f.values);
            prop_assert!(err < 1e-13, "err {err:e}");
        }
    }

    #[test]
    fn parseval_holds(seed in any::<u64>()) {
        for grid in grids() {
            let plan = SpectralPlan::new(grid);
            let f = random_field(grid, seed);
            let fk = plan.forward(&f).unwrap();
            let real = norm(&f.values).powi(2);
            let spectral = norm(&fk.values).powi(2) / grid.len() as f64;
            prop_assert!((real - spectral).abs() / real < 1e-12);
        }
    }

    #[test]
    fn multiplier_is_self_adjoint(seed in any::<u64>()) {
        let sym = curvature_symbol();
        for grid in grids() {
            let plan = SpectralPlan::new(grid);
            let u = random_field(grid, seed);
            let v = random_field(grid, seed.wrapping_add(1));
            let ku = plan.apply_multiplier(&u, |k| sym.eval(k)).unwrap();
            let kv = plan.apply_multiplier(&v, |k| sym.eval(k)).unwrap();
            let area = grid.cell_area();
            let lhs = inner_product(&ku.values, &v.values, area);
            let rhs = inner_product(&u.values, &kv.values, area);
            let scale = norm(&ku.values) * norm(&v.values) * area;
            prop_assert!((lhs - rhs).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn fractional_powers_compose(seed in any::<u64>(), s1 in 0.05f64..0.5, s2 in 0.05f64..0.5) {
        for grid in grids() {
            let f = smooth_field(grid, seed);
            let two = fractional_laplacian(&fractional_laplacian(&f, s1).unwrap(), s2).unwrap();
            let one = fractional_laplacian(&f, s1 + s2).unwrap();
            let err = diff_norm(&two.values, &one.values) / norm(&one.values);
            prop_assert!(err < 1e-10, "err {err:e}");
        }
    }

    #[test]
    fn multiplier_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let grid = grids()[1];
        let plan = SpectralPlan::new(grid);
        let sym = curvature_symbol();
        let u = random_field(grid, seed);
        let v = random_field(grid, seed ^ 0x5555);
        let comb: Vec<C64> = u.values.iter().zip(&v.values).map(|(x, y)| x * a + y * b).collect();
        let comb = SpectralField::new(grid, comb, Space::Real).unwrap();
        let lhs = plan.apply_multiplier(&comb, |k| sym.eval(k)).unwrap();
        let ku = plan.apply_multiplier(&u, |k| sym.eval(k)).unwrap();
        let kv = plan.apply_multiplier(&v, |k| sym.eval(k)).unwrap();
        let rhs: Vec<C64> = ku.values.iter().zip(&kv.values).map(|(x, y)| x * a + y * b).collect();
        prop_assert!(diff_norm(&lhs.values, &rhs) <= 1e-12 * (1.0 + norm(&rhs)));
    }
}
