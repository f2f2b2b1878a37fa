//! Conformal maps built from similarities and inversions, embedded in R^m.
//!
//! Run with:
//!   cargo run --example conformal_maps

use ima_lab::contrast::local_ima_contrast;
use ima_lab::linalg::{random_orthonormal, rotation_2d};
use ima_lab::mixing::{conformality_defect, ConformalMap, ConformalPrimitive, MixingMap};
use ima_lab::seeding::stream_rng;

fn main() -> ima_lab::error::Result<()> {
    let embed = random_orthonormal(&mut stream_rng(7, 0), 6, 2);
    let f = ConformalMap::new(
        embed,
        vec![
            ConformalPrimitive::similarity(2.0, rotation_2d(0.8), vec![1.0, -0.5])?,
            ConformalPrimitive::inversion(vec![0.0, 3.0]),
        ],
        1e-6,
    )?;
    for s in [[0.1, 0.2], [-1.5, 0.7], [2.0, 2.0]] {
        let j = f.jacobian(&s)?;
        println!(
            "s = {s:?}  λ = {:.5}  defect = {:.1e}  contrast = {:.1e}",
            f.conformal_factor(&s)?,
            conformality_defect(&f, &s)?,
            local_ima_contrast(&j)?.value()
        );
    }
    // Pull the inversion centre (0, 3) back through the similarity.
    let back = rotation_2d(-0.8).as_dmatrix() * nalgebra::DVector::from_vec(vec![-1.0, 3.5]) / 2.0;
    let pole = [back[0], back[1]];
    match f.eval(&pole) {
        Ok(x) => println!("near the pole: ‖f‖ = {:.3e}", x.norm()),
        Err(e) => println!("near the pole: {e}"),
    }
    Ok(())
}
