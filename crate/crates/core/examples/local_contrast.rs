//! Local contrast of a few hand-picked Jacobians, with the coherence-based
//! upper bound and the linear-map concentration bound.
//!
//! Run with:
//!   cargo run --example local_contrast

use ima_lab::contrast::{
    hadamard_gap_upper_bound, local_ima_contrast, offdiag_coherence, theoretical_success_bound,
};
use ima_lab::linalg::DenseMatrix;

fn main() -> ima_lab::error::Result<()> {
    let cases = [
        (
            "orthogonal columns",
            vec![vec![2.0, 0.0], vec![0.0, 0.5], vec![0.0, 0.0]],
        ),
        ("shear", vec![vec![1.0, 1.0], vec![0.0, 1.0]]),
        (
            "nearly parallel",
            vec![vec![1.0, 1.0], vec![0.0, 0.05], vec![0.0, 0.0]],
        ),
        (
            "3 columns in R^4",
            vec![
                vec![1.0, 0.2, 0.0],
                vec![0.0, 1.0, 0.3],
                vec![0.1, 0.0, 1.0],
                vec![0.0, 0.1, 0.1],
            ],
        ),
    ];

    println!(
        "{:<20} {:>12} {:>10} {:>12}",
        "matrix", "contrast", "coherence", "upper bound"
    );
    for (name, rows) in cases {
        let j = DenseMatrix::from_rows(&rows)?;
        let c = local_ima_contrast(&j)?.value();
        let eps = offdiag_coherence(&j)?;
        let bound = match hadamard_gap_upper_bound(j.cols(), eps) {
            Ok(b) => format!("{:.6}", b.value()),
            Err(_) => "n/a".to_string(),
        };
        println!("{name:<20} {c:>12.6} {eps:>10.4} {bound:>12}");
    }

    // Rank-deficient input is an error, not a large number.
    let flat = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]])?;
    println!(
        "\nparallel columns: {}",
        local_ima_contrast(&flat).unwrap_err()
    );

    println!("\nPr[C ≤ 0.1] lower bound for d = 3 at κ = 1:");
    for m in [100, 1000, 5000, 20000] {
        println!(
            "  m = {m:>5}: {:.4}",
            theoretical_success_bound(m, 3, 0.1, 1.0)?
        );
    }
    Ok(())
}
