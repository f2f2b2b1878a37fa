//! Smoothed grid maps become nearly orthogonal as the observed dimension
//! grows. A reduced version of the default experiment.
//!
//! Run with:
//!   cargo run --release --example genericity

use ima_lab::experiments::{genericity_experiment, GenericityConfig};

fn main() -> ima_lab::error::Result<()> {
    let cfg = GenericityConfig {
        m_list: vec![8, 16, 64, 256],
        trials: 50,
        n_mc: 500,
        ..Default::default()
    };
    println!(
        "{:>5} {:>8} {:>12} {:>14} {:>14}  warning",
        "m", "success", "mean C", "boundary obs", "boundary exact"
    );
    for r in genericity_experiment(&cfg, 5)? {
        println!(
            "{:>5} {:>8.3} {:>12.5} {:>14.4} {:>14.4}  {}",
            r.m,
            r.empirical_success,
            r.mean_contrast,
            r.boundary_fraction_observed,
            r.boundary_fraction_expected,
            r.warning
        );
    }
    Ok(())
}
