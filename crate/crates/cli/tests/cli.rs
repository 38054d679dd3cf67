use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polariton_core::spectral::read_snapshot;

const SMALL: &str = r#"
[grid]
nx = 32
ny = 32
lx_um = 16.0
ly_um = 16.0

[run]
t_final_ps = 1.0
dt_ps = 0.05
record_stride = 4
snapshot_every_samples = 2
"#;

fn polariton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polariton"))
        .args(args)
        .output()
        .unwrap()
}

fn run_with(config: &str, command: &str, dir: &Path, extra: &[&str]) -> Output {
    fs::create_dir_all(dir).unwrap();
    let cfg = dir.join("input.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    polariton(&args)
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join("out").join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dispersion_table_has_configured_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("[output]\ndispersion_samples = 101\n", "dispersion", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(read(tmp.path(), "dispersion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    let summary = String::from_utf8(read(tmp.path(), "summary.txt")).unwrap();
    let k_inf: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("k_inf_per_um = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((k_inf - 1.3952).abs() <= 1e-3);
}

#[test]
fn evolve_is_deterministic_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(
        run_with(SMALL, "evolve", a.path(), &["--threads", "1"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_with(SMALL, "evolve", b.path(), &["--threads", "3"]).status.code(),
        Some(0)
    );
    for name in [
        "series.csv",
        "density.csv",
        "radial.csv",
        "final.pfqm",
        "summary.txt",
        "snapshots/snap_000002.pfqm",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn echoed_config_reproduces_outputs() {
    let a = tempfile::tempdir().unwrap();
    let o = run_with(SMALL, "evolve", a.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = String::from_utf8(read(a.path(), "config.toml")).unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_with(&echo, "evolve", b.path(), &[]).status.code(), Some(0));
    assert_eq!(read(a.path(), "final.pfqm"), read(b.path(), "final.pfqm"));
    assert_eq!(read(a.path(), "config.toml"), read(b.path(), "config.toml"));
}

#[test]
fn snapshots_follow_the_sample_stride() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_with(SMALL, "evolve", tmp.path(), &[]).status.code(), Some(0));
    // 20 steps sampled every 4: samples 0..=5, snapshots at 0, 2, 4
    let dir = tmp.path().join("out/snapshots");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["snap_000000.pfqm", "snap_000002.pfqm", "snap_000004.pfqm"]);
    let (field, t) = read_snapshot(fs::File::open(dir.join("snap_000002.pfqm")).unwrap()).unwrap();
    assert_eq!(field.grid.nx(), 32);
    assert!((t - 0.4).abs() < 1e-12);
}

#[test]
fn noise_seed_changes_only_noisy_runs() {
    let noisy = format!("{SMALL}noise_amplitude = 0.01\n");
    let run = |cfg: &str, seed: &str| {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(
            run_with(cfg, "evolve", tmp.path(), &["--seed", seed]).status.code(),
            Some(0)
        );
        read(tmp.path(), "final.pfqm")
    };
    assert_eq!(run(SMALL, "1"), run(SMALL, "2"));
    assert_eq!(run(&noisy, "1"), run(&noisy, "1"));
    assert_ne!(run(&noisy, "1"), run(&noisy, "2"));
}

#[test]
fn sweep_points_get_their_own_directories() {
    let cfg = format!("{SMALL}\n[sweep]\na_values_per_um = [0.0, 2.6]\nmodels = [\"curvature\", \"constant-mass\"]\n");
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with(&cfg, "evolve", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for d in [
        "curvature_a0",
        "curvature_a2.6",
        "constant-mass_a0",
        "constant-mass_a2.6",
    ] {
        assert!(tmp.path().join("out").join(d).join("final.pfqm").exists(), "{d}");
    }
    let sweep = String::from_utf8(read(tmp.path(), "sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
}

#[test]
fn unknown_keys_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("[model]\ngamma = 0.2\n", "evolve", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
}

#[test]
fn invalid_values_exit_with_code_2_and_key_path() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("[pump]\nwidth_um = -3.0\n", "evolve", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pump.width_um"), "{}", stderr(&o));
    let o = run_with("[response]\npoints = 7\n", "response", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("response.points"));
}

#[test]
fn watchdog_trip_exits_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}watchdog_max_abs = 0.5\n");
    let o = run_with(&cfg, "evolve", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("watchdog"), "{}", stderr(&o));
}

#[test]
fn planewave_branches_start_at_origin_and_rise() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("", "planewave", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut curves = Vec::new();
    for name in ["planewave_curvature.csv", "planewave_constant-mass.csv"] {
        let csv = String::from_utf8(read(tmp.path(), name)).unwrap();
        let rho: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(rho[0], 0.0);
        assert!(rho.windows(2).all(|w| w[1] > w[0]), "{name}");
        curves.push(rho);
    }
    assert_ne!(curves[0], curves[1]);
}

#[test]
fn response_without_flow_is_radially_symmetric() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[response]\npoints = 32\nvelocity_um_per_ps = [0.0, 0.0]\n";
    assert_eq!(run_with(cfg, "response", tmp.path(), &[]).status.code(), Some(0));
    let csv = String::from_utf8(read(tmp.path(), "response_curvature.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(3).map(|v| v.parse().unwrap()).collect())
        .collect();
    let at = |ix: usize, iy: usize| rows[iy * 32 + ix][2];
    for iy in 1..32 {
        for ix in 1..32 {
            let m = at(ix, iy);
            assert!((m - at(iy, ix)).abs() <= 1e-12 * m, "transpose");
            assert!((m - at(32 - ix, iy)).abs() <= 1e-12 * m, "mirror");
        }
    }
}

#[test]
fn selftest_passes_on_defaults() {
    let o = polariton(&["selftest"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{text}");
}
