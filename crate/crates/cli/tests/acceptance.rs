//! Acceptance suite: one PASS/FAIL line per criterion with the measured
//! values. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use polariton_cli::checks::{self, Check};
use polariton_core::dynamics::SplittingOrder;

fn strang_both_orders() -> Check {
    let mut check = checks::strang_order();
    if check.passed {
        match checks::strang_slope(SplittingOrder::KineticLocalKinetic) {
            Ok(slope) => {
                check.passed = (1.9..=2.1).contains(&slope);
                check.detail = format!("{}; kinetic-local-kinetic slope {slope:.4}", check.detail);
            }
            Err(e) => {
                check.passed = false;
                check.detail = format!("{}; kinetic-local-kinetic error: {e}", check.detail);
            }
        }
    }
    check
}

fn main() -> ExitCode {
    let criteria: Vec<(usize, fn() -> Check)> = vec![
        (1, checks::inflection),
        (2, checks::fractional_scaling),
        (3, checks::spectral_suite),
        (4, strang_both_orders),
        (5, checks::plane_wave_fixed_point),
        (6, || checks::cubic_residuals(1000)),
        (7, || checks::bogoliubov_oracle(1000)),
        (8, checks::response_maps),
        (9, checks::damping_trend),
        (10, checks::sweep_trend),
        (11, checks::ring_trend),
        (12, checks::balance_law),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (n, run) in criteria {
        let check = run();
        println!("[{n:>2}] {check}");
        if !check.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.0} s",
        12 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
