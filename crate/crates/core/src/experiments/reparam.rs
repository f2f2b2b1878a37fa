use std::sync::Arc;

use serde::Serialize;

use super::{local_draws, summarize, LocalDraw};
use crate::distributions::{sample_factorial, FactorialDistribution};
use crate::error::{Error, Result};
use crate::linalg::permutation_matrix;
use crate::mixing::{ElementwiseMap, LinearMap, MixingMap, MonotoneTransform};
use crate::mpa::ComposedMap;
use crate::stats::mean_stderr;

/// Paired estimates of `C(f, p_s)` and `C(f ∘ h⁻¹ ∘ P⁻¹, (P∘h)_# p_s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReparamReport {
    pub n_samples: usize,
    pub original_mean: f64,
    pub original_stderr: f64,
    pub reparam_mean: f64,
    pub reparam_stderr: f64,
    /// `|original_mean − reparam_mean|`.
    pub difference: f64,
    /// `√(se₁² + se₂²)`, ignoring the pairing.
    pub combined_stderr: f64,
    /// Standard error of the per-draw differences.
    pub paired_stderr: f64,
    pub rejected: usize,
    pub cdf_clamps: u64,
    /// `difference ≤ 3 · combined_stderr`, or both estimates agree to 1e-12.
    pub pass: bool,
}

/// Estimates both contrasts on the same latent draws: the reparametrized
/// model sees `s̃ = P h(s)` for every draw `s` of the original.
pub fn reparam_invariance_check(
    map: Arc<dyn MixingMap>,
    p_s: &FactorialDistribution,
    perm: &[usize],
    transforms: &[MonotoneTransform],
    n: usize,
    seed: u64,
) -> Result<ReparamReport> {
    let d = map.latent_dim();
    if p_s.dim() != d || perm.len() != d || transforms.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if p_s.dim() != d {
                p_s.dim()
            } else if perm.len() != d {
                perm.len()
            } else {
                transforms.len()
            },
        });
    }
    if n < super::MIN_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {} samples, got {n}",
            super::MIN_SAMPLES
        )));
    }
    let h = ElementwiseMap::new(transforms.to_vec())?;
    let p = permutation_matrix(perm)?;
    let tilde_f = ComposedMap::new(vec![
        Arc::new(LinearMap::new(p.transpose())?),
        Arc::new(h.inverse()),
        map.clone(),
    ])?;

    let points = sample_factorial(p_s, n, seed)?;
    let moved = points
        .iter()
        .map(|s| Ok((p.as_dmatrix() * h.eval(s)?).as_slice().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let a = local_draws(map.as_ref(), &points)?;
    let b = local_draws(&tilde_f, &moved)?;
    let ea = summarize(&a)?;
    let eb = summarize(&b)?;

    let diffs: Vec<f64> = a
        .iter()
        .zip(&b)
        .filter_map(|(x, y)| match (x, y) {
            (LocalDraw::Value { contrast: u, .. }, LocalDraw::Value { contrast: v, .. }) => {
                Some(u - v)
            }
            _ => None,
        })
        .collect();
    let (_, paired_stderr) = mean_stderr(&diffs);
    let difference = (ea.mean - eb.mean).abs();
    let combined_stderr = ea.stderr.hypot(eb.stderr);
    Ok(ReparamReport {
        n_samples: n,
        original_mean: ea.mean,
        original_stderr: ea.stderr,
        reparam_mean: eb.mean,
        reparam_stderr: eb.stderr,
        difference,
        combined_stderr,
        paired_stderr,
        rejected: ea.rejected + eb.rejected,
        cdf_clamps: ea.cdf_clamps + eb.cdf_clamps,
        pass: difference <= 3.0 * combined_stderr || difference <= 1e-12,
    })
}
