use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::default_kappa;
use super::{local_draws, summarize};
use crate::contrast::theoretical_success_bound;
use crate::distributions::{
    sample_factorial, FactorialDistribution, RadialLaw, SphericalSampler, UnivariateLaw,
};
use crate::error::{Error, Result};
use crate::mixing::{sample_grid_map, SmoothGridMap};
use crate::seeding::mix_path;

/// Parameters of the smoothed-grid genericity experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericityConfig {
    #[serde(default = "GenericityConfig::default_d")]
    pub d: usize,
    #[serde(default = "GenericityConfig::default_m_list")]
    pub m_list: Vec<usize>,
    /// Grid spacing.
    #[serde(default = "GenericityConfig::default_delta_grid")]
    pub delta_grid: f64,
    /// Half-width of the blending window; must be below `delta_grid / 4`.
    #[serde(default = "GenericityConfig::default_eps")]
    pub eps: f64,
    /// Success threshold on each map's contrast estimate.
    #[serde(default = "GenericityConfig::default_delta_contrast")]
    pub delta_contrast: f64,
    /// Maps per `m`.
    #[serde(default = "GenericityConfig::default_trials")]
    pub trials: usize,
    /// Latent draws per map.
    #[serde(default = "GenericityConfig::default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub radial: RadialLaw,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl GenericityConfig {
    fn default_d() -> usize {
        2
    }
    fn default_m_list() -> Vec<usize> {
        vec![16, 64, 256, 1024]
    }
    fn default_delta_grid() -> f64 {
        0.5
    }
    fn default_eps() -> f64 {
        0.01
    }
    fn default_delta_contrast() -> f64 {
        0.1
    }
    fn default_trials() -> usize {
        200
    }
    fn default_n_mc() -> usize {
        2000
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if self.m_list.is_empty() {
            return bad("m_list is empty".into());
        }
        if let Some(&m) = self.m_list.iter().find(|&&m| m < self.d.max(2)) {
            return bad(format!("every m must be at least max(d, 2), got {m}"));
        }
        if !(self.delta_grid > 0.0 && self.delta_grid <= 1.0) {
            return bad(format!(
                "delta_grid must lie in (0, 1], got {}",
                self.delta_grid
            ));
        }
        if !(self.eps > 0.0 && self.eps < self.delta_grid / 4.0) {
            return bad(format!(
                "eps must lie in (0, delta_grid/4), got {}",
                self.eps
            ));
        }
        if !(self.delta_contrast > 0.0 && self.delta_contrast.is_finite()) {
            return bad(format!(
                "delta_contrast must be positive, got {}",
                self.delta_contrast
            ));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.n_mc < super::MIN_SAMPLES {
            return bad(format!(
                "n_mc must be at least {}, got {}",
                super::MIN_SAMPLES,
                self.n_mc
            ));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        SphericalSampler::new(self.d.max(2), self.radial.clone())
            .map(|_| ())
            .map_err(|e| Error::Config(e.to_string()))
    }
}

impl Default for GenericityConfig {
    fn default() -> Self {
        Self {
            d: Self::default_d(),
            m_list: Self::default_m_list(),
            delta_grid: Self::default_delta_grid(),
            eps: Self::default_eps(),
            delta_contrast: Self::default_delta_contrast(),
            trials: Self::default_trials(),
            n_mc: Self::default_n_mc(),
            radial: RadialLaw::default(),
            kappa: default_kappa(),
        }
    }
}

/// One `m` of the genericity experiment. The leading columns mirror
/// [`super::SweepRow`], with `delta` the contrast threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityRow {
    pub m: usize,
    pub d: usize,
    pub delta: f64,
    pub trials: usize,
    pub empirical_success: f64,
    pub theoretical_bound_at_kappa: f64,
    pub kappa_used: f64,
    pub delta_grid: f64,
    pub eps: f64,
    pub n_mc: usize,
    /// Mean over maps of the estimated global contrast.
    pub mean_contrast: f64,
    /// Fraction of all latent draws that fell in a blending window.
    pub boundary_fraction_observed: f64,
    /// Exact probability of the blending windows under the uniform law.
    pub boundary_fraction_expected: f64,
    /// Mean over maps of the boundary draws' share of the contrast estimate.
    pub boundary_contribution_mean: f64,
    pub rejected: usize,
    pub clamp_count: u64,
    /// Construction warning of the first map, if any.
    pub warning: String,
}

struct MapOutcome {
    mean: f64,
    boundary_draws: usize,
    boundary_contribution: f64,
    rejected: usize,
    clamps: u64,
    warning: Option<String>,
    expected_fraction: f64,
}

fn one_map(
    cfg: &GenericityConfig,
    sampler: &SphericalSampler,
    p_s: &FactorialDistribution,
    seed: u64,
) -> Result<MapOutcome> {
    let map: SmoothGridMap = sample_grid_map(
        cfg.d,
        sampler.ambient_dim(),
        cfg.delta_grid,
        sampler,
        cfg.eps,
        mix_path(seed, &[0]),
    )?;
    let points = sample_factorial(p_s, cfg.n_mc, mix_path(seed, &[1]))?;
    let draws = local_draws(&map, &points)?;
    let est = summarize(&draws)?;
    let mut boundary_draws = 0;
    let mut boundary_sum = 0.0;
    for (s, d) in points.iter().zip(&draws) {
        if map.in_boundary_region(s) {
            boundary_draws += 1;
            boundary_sum += d.value().unwrap_or(0.0);
        }
    }
    Ok(MapOutcome {
        mean: est.mean,
        boundary_draws,
        boundary_contribution: boundary_sum / est.n_samples as f64,
        rejected: est.rejected,
        clamps: est.clamp_count,
        warning: map.warnings().first().cloned(),
        expected_fraction: map.boundary_fraction(),
    })
}

/// Fraction of sampled smoothed grid maps whose estimated global contrast
/// under uniform sources is at most `delta_contrast`, per `m`.
///
/// Map `t` at `m` uses the sub-seed `mix(seed, m, t)`; draws in the blending
/// windows are kept and tracked separately.
pub fn genericity_experiment(cfg: &GenericityConfig, seed: u64) -> Result<Vec<GenericityRow>> {
    cfg.validate()?;
    let p_s = FactorialDistribution::iid(UnivariateLaw::unit_uniform(), cfg.d)?;
    let mut m_list = cfg.m_list.clone();
    m_list.sort_unstable();
    m_list
        .iter()
        .map(|&m| {
            let sampler = SphericalSampler::new(m, cfg.radial.clone())?;
            let outcomes = (0..cfg.trials)
                .into_par_iter()
                .map(|t| one_map(cfg, &sampler, &p_s, mix_path(seed, &[m as u64, t as u64])))
                .collect::<Result<Vec<_>>>()?;
            let n = outcomes.len() as f64;
            let hits = outcomes
                .iter()
                .filter(|o| o.mean <= cfg.delta_contrast)
                .count();
            Ok(GenericityRow {
                m,
                d: cfg.d,
                delta: cfg.delta_contrast,
                trials: cfg.trials,
                empirical_success: hits as f64 / n,
                theoretical_bound_at_kappa: theoretical_success_bound(
                    m,
                    cfg.d,
                    cfg.delta_contrast,
                    cfg.kappa,
                )?,
                kappa_used: cfg.kappa,
                delta_grid: cfg.delta_grid,
                eps: cfg.eps,
                n_mc: cfg.n_mc,
                mean_contrast: outcomes.iter().map(|o| o.mean).sum::<f64>() / n,
                boundary_fraction_observed: outcomes.iter().map(|o| o.boundary_draws).sum::<usize>()
                    as f64
                    / (n * cfg.n_mc as f64),
                boundary_fraction_expected: outcomes[0].expected_fraction,
                boundary_contribution_mean: outcomes
                    .iter()
                    .map(|o| o.boundary_contribution)
                    .sum::<f64>()
                    / n,
                rejected: outcomes.iter().map(|o| o.rejected).sum(),
                clamp_count: outcomes.iter().map(|o| o.clamps).sum(),
                warning: outcomes[0].warning.clone().unwrap_or_default(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenericityConfig {
        GenericityConfig {
            m_list: vec![32, 4],
            trials: 6,
            n_mc: 200,
            ..Default::default()
        }
    }

    #[test]
    fn rows_report_boundary_bookkeeping() {
        let rows = genericity_experiment(&small(), 5).unwrap();
        assert_eq!(rows[0].m, 4);
        for r in &rows {
            assert!((r.boundary_fraction_expected - (1.0 - 0.96f64.powi(2))).abs() < 1e-12);
            assert!(r.boundary_fraction_observed > 0.0 && r.boundary_fraction_observed < 0.3);
            assert!(r.boundary_contribution_mean <= r.mean_contrast + 1e-12);
            assert!((0.0..=1.0).contains(&r.empirical_success));
        }
        // p·d = 6 blocks of columns exceed m = 4.
        assert!(!rows[0].warning.is_empty());
        assert!(rows[1].warning.is_empty());
    }

    #[test]
    fn reproducible() {
        assert_eq!(
            genericity_experiment(&small(), 8).unwrap(),
            genericity_experiment(&small(), 8).unwrap()
        );
    }

    #[test]
    fn eps_must_be_small() {
        let cfg = GenericityConfig {
            eps: 0.2,
            ..small()
        };
        assert!(matches!(
            genericity_experiment(&cfg, 0),
            Err(Error::Config(_))
        ));
    }
}
