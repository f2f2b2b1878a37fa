//! Contrast gap between a conformal ground truth and two spurious solutions
//! that reproduce the same observed distribution.
//!
//! Run with:
//!   cargo run --release --example spurious_solutions

use ima_lab::experiments::{spurious_gap_experiment, SpuriousConfig};

fn main() -> ima_lab::error::Result<()> {
    let cfg = SpuriousConfig {
        n: 10_000,
        ..Default::default()
    };
    let report = spurious_gap_experiment(&cfg, 42)?;
    println!(
        "{:<17} {:<13} {:>12} {:>10} {:>10}  ok",
        "branch", "role", "mean", "stderr", "threshold"
    );
    for r in &report.rows {
        println!(
            "{:<17} {:<13} {:>12.3e} {:>10.1e} {:>10.1e}  {}",
            r.branch, r.role, r.mean, r.stderr, r.threshold, r.pass
        );
    }
    println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });

    let identity = SpuriousConfig {
        angle_deg: 0.0,
        ..cfg
    };
    println!(
        "\nidentity rotation: {}",
        spurious_gap_experiment(&identity, 42).unwrap_err()
    );
    Ok(())
}
