//! The global contrast is unchanged by permuting the sources and applying
//! invertible element-wise transforms to them.
//!
//! Run with:
//!   cargo run --release --example reparam_invariance

use std::sync::Arc;

use ima_lab::distributions::{FactorialDistribution, SphericalSampler, UnivariateLaw};
use ima_lab::experiments::reparam_invariance_check;
use ima_lab::mixing::{sample_grid_map, MonotoneTransform};

fn main() -> ima_lab::error::Result<()> {
    let m = 12;
    let map = Arc::new(sample_grid_map(
        3,
        m,
        0.5,
        &SphericalSampler::gaussian(m)?,
        0.02,
        9,
    )?);
    let p_s = FactorialDistribution::iid(UnivariateLaw::unit_uniform(), 3)?;
    let h = [
        MonotoneTransform::Cube,
        MonotoneTransform::Affine {
            scale: -2.0,
            shift: 1.0,
        },
        MonotoneTransform::Tanh,
    ];
    let r = reparam_invariance_check(map, &p_s, &[2, 0, 1], &h, 20_000, 4)?;
    println!(
        "C(f, p_s)            = {:.6} ± {:.1e}",
        r.original_mean, r.original_stderr
    );
    println!(
        "C(f∘h⁻¹∘P⁻¹, P h p_s) = {:.6} ± {:.1e}",
        r.reparam_mean, r.reparam_stderr
    );
    println!(
        "difference {:.2e}, combined stderr {:.2e}, paired stderr {:.2e}: {}",
        r.difference,
        r.combined_stderr,
        r.paired_stderr,
        if r.pass { "PASS" } else { "FAIL" }
    );
    Ok(())
}
