//! Local IMA contrast for rectangular Jacobians and its closed-form companions.
//!
//! For a Jacobian `J` with `m ≥ d` rows the local contrast is
//!
//! ```text
//! c(J) = Σ_i log ‖J[:, i]‖ − ½ log det(JᵀJ)
//! ```
//!
//! which is zero exactly when the columns are mutually orthogonal. The
//! log-determinant is taken from the singular values of the column-normalised
//! matrix, never from an explicit determinant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RANK_TOL};

/// Negative round-off below this magnitude is clamped to zero.
pub const NEGATIVE_SLACK: f64 = 1e-12;

/// Column norms below this are treated as zero.
const ZERO_NORM: f64 = 1e-300;

/// Non-negative contrast value in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ContrastValue(f64);

impl ContrastValue {
    pub const ZERO: ContrastValue = ContrastValue(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<ContrastValue> for f64 {
    fn from(c: ContrastValue) -> f64 {
        c.0
    }
}

/// Contrast together with whether the negative-round-off clamp fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastEvaluation {
    pub contrast: ContrastValue,
    pub clamped: bool,
}

fn column_norms(j: &DenseMatrix) -> Vec<f64> {
    (0..j.cols())
        .map(|c| j.as_dmatrix().column(c).norm())
        .collect()
}

/// Local IMA contrast of a Jacobian with the default relative rank tolerance.
pub fn local_ima_contrast(j: &DenseMatrix) -> Result<ContrastValue> {
    local_ima_contrast_detailed(j, RANK_TOL).map(|e| e.contrast)
}

/// Local IMA contrast with an explicit rank tolerance, also reporting clamping.
pub fn local_ima_contrast_detailed(j: &DenseMatrix, rank_tol: f64) -> Result<ContrastEvaluation> {
    if j.rows() < j.cols() {
        return Err(Error::RankDeficient {
            ratio: 0.0,
            tol: rank_tol,
        });
    }
    let norms = column_norms(j);
    if norms.iter().any(|&n| n < ZERO_NORM) {
        return Err(Error::RankDeficient {
            ratio: 0.0,
            tol: rank_tol,
        });
    }
    if j.cols() == 1 {
        return Ok(ContrastEvaluation {
            contrast: ContrastValue::ZERO,
            clamped: false,
        });
    }

    // c(J) = c(J D⁻¹) = −Σ log σ_i(J D⁻¹) with D the column norms.
    let mut w = j.as_dmatrix().clone();
    for (c, n) in norms.iter().enumerate() {
        w.column_mut(c).unscale_mut(*n);
    }
    let sv = w.singular_values();
    let max = sv.max();
    let min = sv.min();
    let ratio = min / max;
    if !(ratio > rank_tol) {
        return Err(Error::RankDeficient {
            ratio,
            tol: rank_tol,
        });
    }
    // `0.0 - x` rather than `-x` keeps an exact zero positive.
    let value = 0.0 - sv.iter().map(|s| s.ln()).sum::<f64>();

    if value >= 0.0 {
        Ok(ContrastEvaluation {
            contrast: ContrastValue(value),
            clamped: false,
        })
    } else if value >= -NEGATIVE_SLACK {
        Ok(ContrastEvaluation {
            contrast: ContrastValue::ZERO,
            clamped: true,
        })
    } else {
        Err(Error::domain(format!(
            "contrast evaluated to {value:e}, beyond the round-off slack"
        )))
    }
}

/// Largest normalised inner product between distinct columns; 0 for one column.
pub fn offdiag_coherence(j: &DenseMatrix) -> Result<f64> {
    let norms = column_norms(j);
    if let Some(c) = norms.iter().position(|&n| n < ZERO_NORM) {
        return Err(Error::ZeroColumn(c));
    }
    let m = j.as_dmatrix();
    let mut worst: f64 = 0.0;
    for a in 0..j.cols() {
        for b in (a + 1)..j.cols() {
            let ip = m.column(a).dot(&m.column(b));
            worst = worst.max(ip.abs() / (norms[a] * norms[b]));
        }
    }
    Ok(worst)
}

/// Upper bound on the local contrast of any `d`-column matrix whose
/// normalised Gram off-diagonals are at most `eps` in magnitude.
///
/// `½ (−log(1 − (d−1)ε) − (d−1) log(1 + ε))`, from the sharp lower bound on
/// `det(I − E)`.
pub fn hadamard_gap_upper_bound(d: usize, eps: f64) -> Result<ContrastValue> {
    if d == 0 {
        return Err(Error::domain("d must be positive"));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "eps must be a non-negative real, got {eps}"
        )));
    }
    let k = (d - 1) as f64;
    if k * eps >= 1.0 {
        return Err(Error::domain(format!(
            "(d−1)·eps = {} must be below 1",
            k * eps
        )));
    }
    let value = 0.5 * (-(-k * eps).ln_1p() - k * eps.ln_1p());
    Ok(ContrastValue(value.max(0.0)))
}

/// Lower bound on `Pr[C ≤ δ]` for linear maps with spherically symmetric
/// columns: `1 − min{1, exp(2 log d − κ(m−1)δ²/d²)}`.
pub fn theoretical_success_bound(m: usize, d: usize, delta: f64, kappa: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("m must be at least 2, got {m}")));
    }
    if d == 0 {
        return Err(Error::domain("d must be positive"));
    }
    if !(delta > 0.0) || !(kappa > 0.0) || !delta.is_finite() || !kappa.is_finite() {
        return Err(Error::domain("delta and kappa must be positive and finite"));
    }
    let d = d as f64;
    let exponent = 2.0 * d.ln() - kappa * (m as f64 - 1.0) * delta * delta / (d * d);
    Ok(1.0 - exponent.exp().min(1.0))
}
