//! Sampling a smoothed grid-wise piecewise-affine map, checking its Jacobian
//! against finite differences, and probing injectivity.
//!
//! Run with:
//!   cargo run --example grid_maps

use ima_lab::contrast::local_ima_contrast;
use ima_lab::distributions::SphericalSampler;
use ima_lab::mixing::{injectivity_probe, jacobian_fd, sample_grid_map, MixingMap};

fn main() -> ima_lab::error::Result<()> {
    let (d, m) = (2, 20);
    let map = sample_grid_map(d, m, 0.5, &SphericalSampler::gaussian(m)?, 0.02, 11)?;
    println!("blocks per axis: {}", map.block_count());
    println!("knots: {:?}", map.knots());
    println!(
        "boundary probability under U[0,1]^2: {:.4}",
        map.boundary_fraction()
    );

    for s in [[0.2, 0.7], [0.49, 0.3], [0.51, 0.99], [0.9, 0.5]] {
        let j = map.jacobian(&s)?;
        let fd = jacobian_fd(&map, &s, 1e-6)?;
        let err = (j.as_dmatrix() - fd.as_dmatrix()).abs().max();
        println!(
            "s = {s:?}  boundary = {:<5}  contrast = {:.5}  |J − FD| = {err:.1e}",
            map.in_boundary_region(&s),
            local_ima_contrast(&j)?.value()
        );
    }

    let report = injectivity_probe(&map, 5000, 3, None)?;
    println!(
        "injectivity probe: {} pairs, {} violations, min ratio {:.3e}",
        report.pairs, report.violations, report.min_ratio
    );

    let mut csv = Vec::new();
    map.write_blocks_csv(&mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!(
        "first block rows:\n{}",
        text.lines().take(4).collect::<Vec<_>>().join("\n")
    );
    Ok(())
}
