//! Monte Carlo estimation of the global contrast and the experiment drivers.
//!
//! All randomness derives from one master seed through counter-mixed
//! sub-seeds, and every parallel reduction runs in index order, so results do
//! not depend on the size of the rayon pool the caller installs.

mod genericity;
mod output;
mod reparam;
mod spurious;
mod sweep;

pub use genericity::{genericity_experiment, GenericityConfig, GenericityRow};
pub use output::{write_csv, write_manifest, Manifest};
pub use reparam::{reparam_invariance_check, ReparamReport};
pub use spurious::{spurious_gap_experiment, GapRow, SpuriousConfig, SpuriousReport};
pub use sweep::{concentration_sweep, SweepConfig, SweepRow};

use rayon::prelude::*;
use serde::Serialize;

use crate::contrast::{local_ima_contrast_detailed, NEGATIVE_SLACK};
use crate::distributions::{sample_factorial, FactorialDistribution};
use crate::error::{Error, Result};
use crate::linalg::RANK_TOL;
use crate::mixing::{Domain, MixingMap};
use crate::stats::mean_stderr;

/// Largest tolerated fraction of rank-deficient draws.
pub const MAX_REJECTION: f64 = 1e-3;

/// Smallest sample size accepted by [`estimate_global_contrast`].
pub const MIN_SAMPLES: usize = 100;

/// Monte Carlo estimate of the global contrast.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    /// Accepted draws.
    pub n_samples: usize,
    /// Draws whose contrast was clamped from tiny negative round-off to 0.
    pub clamp_count: u64,
    /// CDF clamp events inside the map (MPA stages).
    pub cdf_clamps: u64,
    /// Rank-deficient draws left out of the mean.
    pub rejected: usize,
}

/// Per-draw outcome.
#[derive(Debug, Clone, Copy)]
pub(crate) enum LocalDraw {
    Value {
        contrast: f64,
        clamped: bool,
        cdf_clamps: u64,
    },
    Rejected,
}

impl LocalDraw {
    pub(crate) fn value(&self) -> Option<f64> {
        match self {
            LocalDraw::Value { contrast, .. } => Some(*contrast),
            LocalDraw::Rejected => None,
        }
    }
}

pub(crate) fn local_draw(map: &dyn MixingMap, s: &[f64]) -> Result<LocalDraw> {
    let mut cdf_clamps = 0;
    let j = match map.jacobian_tracked(s, &mut cdf_clamps) {
        Ok(j) => j,
        Err(Error::NonFinite { .. }) => return Ok(LocalDraw::Rejected),
        Err(e) => return Err(e),
    };
    match local_ima_contrast_detailed(&j, RANK_TOL) {
        Ok(e) => Ok(LocalDraw::Value {
            contrast: e.contrast.value(),
            clamped: e.clamped,
            cdf_clamps,
        }),
        Err(Error::RankDeficient { .. }) => Ok(LocalDraw::Rejected),
        Err(e) => Err(e),
    }
}

/// Local contrast at every point, in input order.
pub(crate) fn local_draws(map: &dyn MixingMap, points: &[Vec<f64>]) -> Result<Vec<LocalDraw>> {
    points.par_iter().map(|s| local_draw(map, s)).collect()
}

pub(crate) fn summarize(draws: &[LocalDraw]) -> Result<ContrastEstimate> {
    let total = draws.len();
    let values: Vec<f64> = draws.iter().filter_map(LocalDraw::value).collect();
    let rejected = total - values.len();
    if rejected as f64 > MAX_REJECTION * total as f64 || values.is_empty() {
        return Err(Error::DegenerateMap { rejected, total });
    }
    let (mut clamp_count, mut cdf_clamps) = (0, 0);
    for d in draws {
        if let LocalDraw::Value {
            clamped,
            cdf_clamps: c,
            ..
        } = d
        {
            clamp_count += *clamped as u64;
            cdf_clamps += c;
        }
    }
    let (mean, stderr) = mean_stderr(&values);
    debug_assert!(mean >= -NEGATIVE_SLACK);
    Ok(ContrastEstimate {
        mean,
        stderr,
        n_samples: values.len(),
        clamp_count,
        cdf_clamps,
        rejected,
    })
}

/// Global contrast at explicit latent points.
pub fn contrast_at_points(map: &dyn MixingMap, points: &[Vec<f64>]) -> Result<ContrastEstimate> {
    summarize(&local_draws(map, points)?)
}

fn check_support(map: &dyn MixingMap, p_s: &FactorialDistribution) -> Result<()> {
    if p_s.dim() != map.latent_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.latent_dim(),
            got: p_s.dim(),
        });
    }
    let support = p_s.support_box();
    let inside = match map.domain() {
        Domain::Whole => true,
        Domain::UnitCube | Domain::OpenUnitCube => {
            support.iter().all(|&(lo, hi)| lo >= 0.0 && hi <= 1.0)
        }
        Domain::Box(b) => support
            .iter()
            .zip(&b)
            .all(|(&(lo, hi), &(blo, bhi))| lo >= blo && hi <= bhi),
    };
    if inside {
        Ok(())
    } else {
        Err(Error::domain(
            "source support is not contained in the map domain",
        ))
    }
}

/// Mean local contrast over `n` draws from `p_s`.
pub fn estimate_global_contrast(
    map: &dyn MixingMap,
    p_s: &FactorialDistribution,
    n: usize,
    seed: u64,
) -> Result<ContrastEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    check_support(map, p_s)?;
    contrast_at_points(map, &sample_factorial(p_s, n, seed)?)
}
