use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use super::MixingMap;
use crate::error::{Error, Result};
use crate::seeding::{mix_seed, rng_from_seed};

/// Image distance below which a probed pair counts as a violation.
pub const VIOLATION_DISTANCE: f64 = 1e-9;

/// Pairs closer than this in the latent space are redrawn.
const MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub pairs: usize,
    pub violations: usize,
    /// Smallest `‖f(s) − f(s′)‖ / ‖s − s′‖` seen.
    pub min_ratio: f64,
    /// Pairs dropped because the map could not be evaluated at one end.
    pub skipped: usize,
}

/// Statistical injectivity check over `n_pairs` pairs in the map's domain.
///
/// Half of the pairs are uniform in the bounding box. The other half start
/// at a uniform point `s` and step along the right singular vector of the
/// smallest singular value of `J(s)`, the direction in which a collapse is
/// most likely. `bbox` is required when the domain is unbounded.
pub fn injectivity_probe(
    map: &dyn MixingMap,
    n_pairs: usize,
    seed: u64,
    bbox: Option<&[(f64, f64)]>,
) -> Result<ProbeReport> {
    let d = map.latent_dim();
    let bbox: Vec<(f64, f64)> = match bbox {
        Some(b) => b.to_vec(),
        None => map.domain().bounding_box(d).ok_or_else(|| {
            Error::domain("injectivity probe needs a bounded domain or a bounding box")
        })?,
    };
    if bbox.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bbox.len(),
        });
    }
    if bbox
        .iter()
        .any(|(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::domain(
            "bounding box needs finite lo < hi per coordinate",
        ));
    }
    let width = bbox
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(f64::INFINITY, f64::min);

    let mut report = ProbeReport {
        pairs: 0,
        violations: 0,
        min_ratio: f64::INFINITY,
        skipped: 0,
    };
    let mut rng = rng_from_seed(mix_seed(seed, 0));
    let uniform = |rng: &mut crate::seeding::TaskRng| -> Vec<f64> {
        bbox.iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect()
    };

    for i in 0..n_pairs {
        let s = uniform(&mut rng);
        let t = if i % 2 == 1 {
            guided_partner(map, &s, width * rng.random_range(1e-3..1e-1))
        } else {
            None
        };
        let t = match t {
            Some(t) => t,
            None => loop {
                let t = uniform(&mut rng);
                if dist(&s, &t) >= MIN_SEPARATION {
                    break t;
                }
            },
        };
        match (map.eval(&s), map.eval(&t)) {
            (Ok(a), Ok(b)) => {
                let img = (a - b).norm();
                report.pairs += 1;
                report.min_ratio = report.min_ratio.min(img / dist(&s, &t));
                if img < VIOLATION_DISTANCE {
                    report.violations += 1;
                }
            }
            _ => report.skipped += 1,
        }
    }
    Ok(report)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn guided_partner(map: &dyn MixingMap, s: &[f64], step: f64) -> Option<Vec<f64>> {
    let j = map.jacobian(s).ok()?;
    let svd = j.as_dmatrix().clone().svd(false, true);
    let v_t = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let v: DVector<f64> = v_t.row(idx).transpose();
    let domain = map.domain();
    let mut h = step;
    for _ in 0..8 {
        for sign in [1.0, -1.0] {
            let t: Vec<f64> = s
                .iter()
                .zip(v.iter())
                .map(|(a, b)| a + sign * h * b)
                .collect();
            if domain.contains(&t) && dist(s, &t) >= MIN_SEPARATION {
                return Some(t);
            }
        }
        h *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::SphericalSampler;
    use crate::linalg::DenseMatrix;
    use crate::mixing::{sample_grid_map, Domain, LinearMap};

    #[test]
    fn full_rank_linear_map_is_clean() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let f = LinearMap::new(a).unwrap().with_domain(Domain::UnitCube);
        let r = injectivity_probe(&f, 1000, 1, None).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.pairs, 1000);
        assert!(r.min_ratio > 0.1);
    }

    #[test]
    fn duplicate_columns_are_flagged() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![0.5, 0.5]]).unwrap();
        let f = LinearMap::new(a).unwrap();
        let r = injectivity_probe(&f, 200, 1, Some(&[(0.0, 1.0), (0.0, 1.0)])).unwrap();
        assert!(r.violations > 0);
        assert!(r.min_ratio < 1e-9);
    }

    #[test]
    fn unbounded_domain_needs_a_box() {
        let f = LinearMap::new(DenseMatrix::identity(2)).unwrap();
        assert!(injectivity_probe(&f, 10, 1, None).is_err());
    }

    #[test]
    fn sampled_grid_map_has_no_violations() {
        let g = sample_grid_map(
            2,
            20,
            0.25,
            &SphericalSampler::gaussian(20).unwrap(),
            0.01,
            4,
        )
        .unwrap();
        let r = injectivity_probe(&g, 10_000, 9, None).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.skipped, 0);
    }
}
