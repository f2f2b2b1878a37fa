//! Two affine pieces glued along the hyperplane `s_k = c`.
//!
//! Run with:
//!   cargo run --example two_piece

use ima_lab::linalg::DenseMatrix;
use ima_lab::mixing::{injectivity_probe, make_two_piece, MixingMap};

fn main() -> ima_lab::error::Result<()> {
    let j0 = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]])?;
    let map = make_two_piece(j0.clone(), 1, vec![0.3, 0.2, 1.0], 0.5, 0.05)?;
    println!("rank of J1 − J0: {}", map.difference_rank());
    println!("continuity offset c1: {:?}", map.offset().as_slice());
    for s in [[0.2, 0.3], [0.2, 0.5], [0.2, 0.8]] {
        println!("f({s:?}) = {:?}", map.eval(&s)?.as_slice());
    }
    let bbox = [(-1.0, 2.0), (-1.0, 2.0)];
    let r = injectivity_probe(&map, 2000, 5, Some(&bbox))?;
    println!("probe: {} violations in {} pairs", r.violations, r.pairs);

    // Folding the new column back onto the first column collapses the map.
    match make_two_piece(j0, 1, vec![2.0, 0.0, 0.0], 0.5, 0.0) {
        Ok(_) => println!("unexpectedly accepted a rank-deficient piece"),
        Err(e) => println!("rank-deficient counterexample refused: {e}"),
    }
    Ok(())
}
