use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contrast::{local_ima_contrast, theoretical_success_bound};
use crate::distributions::{sample_isotropic_matrix, RadialLaw, SphericalSampler};
use crate::error::{Error, Result};
use crate::seeding::mix_path;

pub(crate) fn default_kappa() -> f64 {
    1.0
}

/// Parameters of the linear concentration sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "SweepConfig::default_d")]
    pub d: usize,
    /// Success threshold on the contrast.
    #[serde(default = "SweepConfig::default_delta")]
    pub delta: f64,
    #[serde(default = "SweepConfig::default_m_list")]
    pub m_list: Vec<usize>,
    #[serde(default = "SweepConfig::default_trials")]
    pub trials: usize,
    /// Radial law of the sampled columns.
    #[serde(default)]
    pub radial: RadialLaw,
    /// Concentration constant used for the bound column only.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl SweepConfig {
    fn default_d() -> usize {
        3
    }
    fn default_delta() -> f64 {
        0.1
    }
    fn default_m_list() -> Vec<usize> {
        vec![8, 32, 128, 512, 2048]
    }
    fn default_trials() -> usize {
        2000
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::Config(format!(
                "trials must be at least 100, got {}",
                self.trials
            )));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        if self.m_list.is_empty() {
            return Err(Error::Config("m_list is empty".into()));
        }
        if let Some(&m) = self.m_list.iter().find(|&&m| m < self.d.max(2)) {
            return Err(Error::Config(format!(
                "every m must be at least max(d, 2), got {m}"
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        SphericalSampler::new(self.d.max(2), self.radial.clone())
            .map(|_| ())
            .map_err(|e| Error::Config(e.to_string()))
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d: Self::default_d(),
            delta: Self::default_delta(),
            m_list: Self::default_m_list(),
            trials: Self::default_trials(),
            radial: RadialLaw::default(),
            kappa: default_kappa(),
        }
    }
}

/// One `m` of the concentration sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub d: usize,
    pub delta: f64,
    pub trials: usize,
    pub empirical_success: f64,
    pub theoretical_bound_at_kappa: f64,
    pub kappa_used: f64,
}

/// Fraction of random linear maps with contrast at most `delta`, per `m`.
///
/// The contrast of a linear map does not depend on `s`, so each trial costs
/// one matrix. Trial `t` at `m` uses the sub-seed `mix(seed, m, t)`.
pub fn concentration_sweep(cfg: &SweepConfig, seed: u64) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut m_list = cfg.m_list.clone();
    m_list.sort_unstable();
    m_list
        .iter()
        .map(|&m| {
            let sampler = SphericalSampler::new(m, cfg.radial.clone())?;
            let hits = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let j = sample_isotropic_matrix(
                        m,
                        cfg.d,
                        &sampler,
                        mix_path(seed, &[m as u64, t as u64]),
                    )?;
                    Ok((local_ima_contrast(&j)?.value() <= cfg.delta) as usize)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum::<usize>();
            Ok(SweepRow {
                m,
                d: cfg.d,
                delta: cfg.delta,
                trials: cfg.trials,
                empirical_success: hits as f64 / cfg.trials as f64,
                theoretical_bound_at_kappa: theoretical_success_bound(
                    m, cfg.d, cfg.delta, cfg.kappa,
                )?,
                kappa_used: cfg.kappa,
            })
        })
        .collect()
}
