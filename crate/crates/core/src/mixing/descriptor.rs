use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    make_two_piece, sample_grid_map, ConformalMap, ConformalPrimitive, LinearMap, MixingMap,
};
use crate::distributions::{sample_isotropic_matrix, RadialLaw, SphericalSampler};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, DenseMatrix};
use crate::seeding::{mix_seed, rng_from_seed};

fn default_exclusion() -> f64 {
    1e-6
}

/// Serializable recipe for a mixing map. Random families draw from `seed`,
/// or from the caller's fallback seed when it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapDescriptor {
    /// Explicit matrix.
    Matrix { matrix: DenseMatrix },
    /// Random linear map; `orthonormal` draws Haar orthonormal columns instead
    /// of spherically symmetric ones.
    Linear {
        m: usize,
        d: usize,
        #[serde(default)]
        radial: RadialLaw,
        #[serde(default)]
        orthonormal: bool,
        #[serde(default)]
        seed: Option<u64>,
    },
    Grid {
        m: usize,
        d: usize,
        delta: f64,
        eps: f64,
        #[serde(default)]
        radial: RadialLaw,
        #[serde(default)]
        seed: Option<u64>,
    },
    TwoPiece {
        m: usize,
        d: usize,
        k: usize,
        c: f64,
        eps: f64,
        #[serde(default)]
        radial: RadialLaw,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Primitives followed by a Haar orthonormal embedding drawn from `seed`.
    Conformal {
        m: usize,
        d: usize,
        #[serde(default)]
        primitives: Vec<ConformalPrimitive>,
        #[serde(default = "default_exclusion")]
        exclusion_radius: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl MapDescriptor {
    /// `(d, m)`.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            MapDescriptor::Matrix { matrix } => (matrix.cols(), matrix.rows()),
            MapDescriptor::Linear { m, d, .. }
            | MapDescriptor::Grid { m, d, .. }
            | MapDescriptor::TwoPiece { m, d, .. }
            | MapDescriptor::Conformal { m, d, .. } => (*d, *m),
        }
    }

    pub fn build(&self, fallback_seed: u64) -> Result<Arc<dyn MixingMap>> {
        let (d, m) = self.dims();
        if d == 0 || m < d {
            return Err(Error::Config(format!(
                "need 1 ≤ d ≤ m, got m = {m}, d = {d}"
            )));
        }
        Ok(match self {
            MapDescriptor::Matrix { matrix } => Arc::new(LinearMap::new(matrix.clone())?),
            MapDescriptor::Linear {
                radial,
                orthonormal,
                seed,
                ..
            } => {
                let seed = seed.unwrap_or(fallback_seed);
                let a = if *orthonormal {
                    random_orthonormal(&mut rng_from_seed(seed), m, d)
                } else {
                    sample_isotropic_matrix(m, d, &SphericalSampler::new(m, radial.clone())?, seed)?
                };
                Arc::new(LinearMap::new(a)?)
            }
            MapDescriptor::Grid {
                delta,
                eps,
                radial,
                seed,
                ..
            } => Arc::new(sample_grid_map(
                d,
                m,
                *delta,
                &SphericalSampler::new(m, radial.clone())?,
                *eps,
                seed.unwrap_or(fallback_seed),
            )?),
            MapDescriptor::TwoPiece {
                k,
                c,
                eps,
                radial,
                seed,
                ..
            } => {
                let seed = seed.unwrap_or(fallback_seed);
                let sampler = SphericalSampler::new(m, radial.clone())?;
                let j0 = sample_isotropic_matrix(m, d, &sampler, mix_seed(seed, 0))?;
                let col = sampler.sample(&mut rng_from_seed(mix_seed(seed, 1)));
                Arc::new(make_two_piece(j0, *k, col, *c, *eps)?)
            }
            MapDescriptor::Conformal {
                primitives,
                exclusion_radius,
                seed,
                ..
            } => {
                let embed: DenseMatrix =
                    random_orthonormal(&mut rng_from_seed(seed.unwrap_or(fallback_seed)), m, d);
                Arc::new(ConformalMap::new(
                    embed,
                    primitives.clone(),
                    *exclusion_radius,
                )?)
            }
        })
    }
}
