//! Success fraction of random linear maps as the observed dimension grows.
//!
//! Run with:
//!   cargo run --release --example concentration_sweep

use ima_lab::experiments::{concentration_sweep, SweepConfig};

fn main() -> ima_lab::error::Result<()> {
    let cfg = SweepConfig {
        d: 3,
        delta: 0.1,
        m_list: vec![4, 8, 16, 32, 64, 128],
        trials: 1000,
        ..Default::default()
    };
    let rows = concentration_sweep(&cfg, 2024)?;
    println!("{:>6} {:>10} {:>12}", "m", "success", "bound(κ=1)");
    for r in rows {
        println!(
            "{:>6} {:>10.3} {:>12.4}",
            r.m, r.empirical_success, r.theoretical_bound_at_kappa
        );
    }
    Ok(())
}
