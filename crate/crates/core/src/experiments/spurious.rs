use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{estimate_global_contrast, ContrastEstimate};
use crate::distributions::{FactorialDistribution, UnivariateLaw};
use crate::error::{Error, Result};
use crate::linalg::{is_signed_permutation, random_orthonormal, rotation_2d, DenseMatrix};
use crate::mixing::{ConformalMap, ConformalPrimitive, MixingMap};
use crate::mpa::{
    spurious_darmois, spurious_mpa, DarmoisMap, DensitySpec, RotatedGaussianMPA,
    DEFAULT_RESOLUTION, MIN_RESOLUTION,
};
use crate::seeding::mix_seed;

/// Parameters of the spurious-solution gap experiment (`d = 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpuriousConfig {
    /// Observed dimension of the conformal ground truth.
    #[serde(default = "SpuriousConfig::default_m")]
    pub m: usize,
    #[serde(default = "SpuriousConfig::default_sources")]
    pub sources: FactorialDistribution,
    /// Rotation angle in degrees, used for both the MPA and the Darmois branch.
    #[serde(default = "SpuriousConfig::default_angle")]
    pub angle_deg: f64,
    /// Explicit 2×2 orthonormal matrix; overrides `angle_deg`.
    #[serde(default)]
    pub rotation: Option<DenseMatrix>,
    /// Conformal primitives applied before the orthonormal embedding.
    #[serde(default = "SpuriousConfig::default_primitives")]
    pub primitives: Vec<ConformalPrimitive>,
    #[serde(default = "SpuriousConfig::default_resolution")]
    pub darmois_resolution: usize,
    /// Latent draws per estimate.
    #[serde(default = "SpuriousConfig::default_n")]
    pub n: usize,
    /// Absolute floor a spurious contrast must exceed.
    #[serde(default = "SpuriousConfig::default_floor")]
    pub floor: f64,
    /// Required separation of a spurious contrast from 0, in standard errors.
    #[serde(default = "SpuriousConfig::default_sigmas")]
    pub sigmas: f64,
    /// Largest contrast accepted for the ground truth.
    #[serde(default = "SpuriousConfig::default_truth_tol")]
    pub truth_tol: f64,
    /// Also run the MPA branch with standard Gaussian sources.
    #[serde(default = "SpuriousConfig::default_control")]
    pub gaussian_control: bool,
}

impl SpuriousConfig {
    fn default_m() -> usize {
        5
    }
    fn default_sources() -> FactorialDistribution {
        FactorialDistribution::iid(UnivariateLaw::standard_laplace(), 2).expect("two components")
    }
    fn default_angle() -> f64 {
        30.0
    }
    fn default_primitives() -> Vec<ConformalPrimitive> {
        vec![
            ConformalPrimitive::similarity(1.0, rotation_2d(0.4), vec![0.5, -0.25])
                .expect("valid similarity"),
            ConformalPrimitive::inversion(vec![40.0, 0.0]),
        ]
    }
    fn default_resolution() -> usize {
        DEFAULT_RESOLUTION
    }
    fn default_n() -> usize {
        20_000
    }
    fn default_floor() -> f64 {
        1e-3
    }
    fn default_sigmas() -> f64 {
        10.0
    }
    fn default_truth_tol() -> f64 {
        1e-6
    }
    fn default_control() -> bool {
        true
    }

    pub fn rotation_matrix(&self) -> DenseMatrix {
        self.rotation
            .clone()
            .unwrap_or_else(|| rotation_2d(self.angle_deg.to_radians()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.sources.dim() != 2 {
            return bad(format!(
                "sources must be two-dimensional, got {}",
                self.sources.dim()
            ));
        }
        if self.m < 2 {
            return bad(format!("m must be at least 2, got {}", self.m));
        }
        if !self.angle_deg.is_finite() {
            return bad("angle_deg must be finite".into());
        }
        if let Some(r) = &self.rotation {
            if r.rows() != 2 || r.cols() != 2 {
                return bad("rotation must be 2×2".into());
            }
        }
        if self.darmois_resolution < MIN_RESOLUTION {
            return bad(format!(
                "darmois_resolution must be at least {MIN_RESOLUTION}"
            ));
        }
        if self.n < super::MIN_SAMPLES {
            return bad(format!("n must be at least {}", super::MIN_SAMPLES));
        }
        for (name, v) in [
            ("floor", self.floor),
            ("sigmas", self.sigmas),
            ("truth_tol", self.truth_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

impl Default for SpuriousConfig {
    fn default() -> Self {
        Self {
            m: Self::default_m(),
            sources: Self::default_sources(),
            angle_deg: Self::default_angle(),
            rotation: None,
            primitives: Self::default_primitives(),
            darmois_resolution: Self::default_resolution(),
            n: Self::default_n(),
            floor: Self::default_floor(),
            sigmas: Self::default_sigmas(),
            truth_tol: Self::default_truth_tol(),
            gaussian_control: Self::default_control(),
        }
    }
}

/// One estimate of the gap report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    /// `mpa`, `darmois` or `gaussian_control`.
    pub branch: String,
    /// `ground_truth` or `spurious`.
    pub role: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub clamp_count: u64,
    pub cdf_clamps: u64,
    pub rejected: usize,
    /// Bound the estimate must stay below (ground truth) or exceed (spurious).
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpuriousReport {
    pub rows: Vec<GapRow>,
    /// All ground-truth and spurious rows pass, and the Gaussian control
    /// (when run) shows no gap.
    pub pass: bool,
}

impl SpuriousReport {
    pub fn row(&self, branch: &str, role: &str) -> Option<&GapRow> {
        self.rows
            .iter()
            .find(|r| r.branch == branch && r.role == role)
    }
}

fn truth_row(branch: &str, e: ContrastEstimate, tol: f64) -> GapRow {
    row(branch, "ground_truth", e, tol, |m, t| m <= t)
}

fn spurious_row(branch: &str, e: ContrastEstimate, cfg: &SpuriousConfig) -> GapRow {
    let threshold = cfg.floor.max(cfg.sigmas * e.stderr);
    row(branch, "spurious", e, threshold, |m, t| m > t)
}

fn row(
    branch: &str,
    role: &str,
    e: ContrastEstimate,
    threshold: f64,
    ok: fn(f64, f64) -> bool,
) -> GapRow {
    GapRow {
        branch: branch.into(),
        role: role.into(),
        mean: e.mean,
        stderr: e.stderr,
        n_samples: e.n_samples,
        clamp_count: e.clamp_count,
        cdf_clamps: e.cdf_clamps,
        rejected: e.rejected,
        threshold,
        pass: ok(e.mean, threshold),
    }
}

/// Conformal ground truth `f`, the MPA spurious solution `f ∘ a`, and the
/// Darmois spurious solution `f ∘ Oᵀ ∘ g⁻¹` with `g` the Darmois map of
/// `O s`, each with its contrast estimate.
///
/// Refuses rotations that only permute or flip axes.
pub fn spurious_gap_experiment(cfg: &SpuriousConfig, seed: u64) -> Result<SpuriousReport> {
    cfg.validate()?;
    let r = cfg.rotation_matrix();
    if is_signed_permutation(&r, 1e-12) {
        return Err(Error::TrivialRotation);
    }
    let embed = random_orthonormal(&mut crate::seeding::stream_rng(seed, 0), cfg.m, 2);
    let f: Arc<dyn MixingMap> = Arc::new(ConformalMap::new(embed, cfg.primitives.clone(), 1e-6)?);
    let a = Arc::new(RotatedGaussianMPA::new(cfg.sources.clone(), r.clone())?);
    a.check_nontrivial()?;

    let mut rows = Vec::new();
    let truth = estimate_global_contrast(f.as_ref(), &cfg.sources, cfg.n, mix_seed(seed, 1))?;
    rows.push(truth_row("mpa", truth, cfg.truth_tol));
    let fa = spurious_mpa(f.clone(), a)?;
    rows.push(spurious_row(
        "mpa",
        estimate_global_contrast(&fa, &cfg.sources, cfg.n, mix_seed(seed, 2))?,
        cfg,
    ));

    let truth = estimate_global_contrast(f.as_ref(), &cfg.sources, cfg.n, mix_seed(seed, 3))?;
    rows.push(truth_row("darmois", truth, cfg.truth_tol));
    let density = DensitySpec::RotatedFactorial {
        rotation: r.clone(),
        sources: cfg.sources.clone(),
    };
    let dm = Arc::new(DarmoisMap::build(density, cfg.darmois_resolution)?);
    let fd = spurious_darmois(f.clone(), &r, dm)?;
    let uniform = FactorialDistribution::iid(UnivariateLaw::unit_uniform(), 2)?;
    rows.push(spurious_row(
        "darmois",
        estimate_global_contrast(&fd, &uniform, cfg.n, mix_seed(seed, 4))?,
        cfg,
    ));

    let mut pass = rows.iter().all(|r| r.pass);
    if cfg.gaussian_control {
        let gauss = FactorialDistribution::iid(UnivariateLaw::standard_gaussian(), 2)?;
        let ag = Arc::new(RotatedGaussianMPA::new(gauss.clone(), r)?);
        let fg = spurious_mpa(f, ag)?;
        let e = estimate_global_contrast(&fg, &gauss, cfg.n, mix_seed(seed, 5))?;
        let control = truth_row("gaussian_control", e, cfg.truth_tol);
        pass &= control.pass;
        rows.push(GapRow {
            role: "spurious".into(),
            ..control
        });
    }
    Ok(SpuriousReport { rows, pass })
}
