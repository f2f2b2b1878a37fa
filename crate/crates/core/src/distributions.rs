//! Univariate laws, factorial source distributions and spherically symmetric
//! column samplers.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RANK_TOL};
use crate::seeding::{mix_seed, rng_from_seed};

/// CDF values are clamped into `[CDF_CLAMP, 1 − CDF_CLAMP]` before a normal quantile.
pub const CDF_CLAMP: f64 = 1e-15;

const BRACKET_HALF_WIDTH: f64 = 40.0;
const BISECTION_TOL: f64 = 1e-13;
const BISECTION_MAX_ITER: usize = 200;

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `Φ⁻¹(u)`, polished with one Newton step on `Φ`.
pub fn std_normal_quantile(u: f64) -> f64 {
    let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u);
    let density = std_normal_pdf(z);
    if z.is_finite() && density > 0.0 {
        z - (std_normal_cdf(z) - u) / density
    } else {
        z
    }
}

/// Piecewise-linear CDF on a knot table; the density is constant per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLaw {
    xs: Vec<f64>,
    cdf: Vec<f64>,
    origin: Option<BetaShape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaShape {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: usize,
}

impl TabulatedLaw {
    pub fn new(xs: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != cdf.len() {
            return Err(Error::domain(
                "table needs at least two knots and matching lengths",
            ));
        }
        if xs.iter().chain(&cdf).any(|v| !v.is_finite()) {
            return Err(Error::domain("table entries must be finite"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || cdf.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "table knots and CDF values must be strictly increasing",
            ));
        }
        if cdf[0].abs() > 1e-12 || (cdf[cdf.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::domain("tabulated CDF must run from 0 to 1"));
        }
        let mut cdf = cdf;
        let last = cdf.len() - 1;
        cdf[0] = 0.0;
        cdf[last] = 1.0;
        Ok(Self {
            xs,
            cdf,
            origin: None,
        })
    }

    /// Tabulates a density on the given knots: each cell gets its trapezoid
    /// mass, renormalised to 1.
    pub fn from_density(xs: Vec<f64>, density: impl Fn(f64) -> f64) -> Result<Self> {
        let mut cdf = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            let h = xs[i] - xs[i - 1];
            let mass = 0.5 * h * (density(xs[i - 1]) + density(xs[i]));
            cdf[i] = cdf[i - 1] + mass;
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::domain("density has no mass on the table"));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Self::new(xs, cdf)
    }

    /// Beta(α, β)-shaped law on `[0, 1]` with `nodes` equally spaced knots.
    pub fn beta_like(shape: BetaShape) -> Result<Self> {
        let BetaShape { alpha, beta, nodes } = shape;
        if !(alpha >= 1.0 && beta >= 1.0) || nodes < 8 {
            return Err(Error::domain(
                "beta-like law needs alpha, beta ≥ 1 and at least 8 nodes",
            ));
        }
        let xs: Vec<f64> = (0..nodes).map(|i| i as f64 / (nodes - 1) as f64).collect();
        let mut law = Self::from_density(xs, |x| x.powf(alpha - 1.0) * (1.0 - x).powf(beta - 1.0))?;
        law.origin = Some(shape);
        Ok(law)
    }

    fn cell(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&k| k <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < self.xs[0] || x > self.xs[self.xs.len() - 1] {
            return 0.0;
        }
        let i = self.cell(x);
        (self.cdf[i + 1] - self.cdf[i]) / (self.xs[i + 1] - self.xs[i])
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[self.xs.len() - 1] {
            return 1.0;
        }
        let i = self.cell(x);
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }

    fn quantile(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|&c| c <= u)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let t = (u - self.cdf[i]) / (self.cdf[i + 1] - self.cdf[i]);
        self.xs[i] + t * (self.xs[i + 1] - self.xs[i])
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }
}

/// A univariate law with density, CDF, quantile and sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawSpec", into = "LawSpec")]
pub enum UnivariateLaw {
    Uniform {
        low: f64,
        high: f64,
    },
    Gaussian {
        mean: f64,
        std: f64,
    },
    Laplace {
        loc: f64,
        scale: f64,
    },
    /// Density ∝ `exp(−|x−loc|^shape / scale^shape)`, `shape ≥ 1`.
    GenGaussian {
        loc: f64,
        scale: f64,
        shape: f64,
    },
    Tabulated(TabulatedLaw),
}

/// Serialized form: `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum LawSpec {
    Uniform { low: f64, high: f64 },
    Gaussian { mean: f64, std: f64 },
    Laplace { loc: f64, scale: f64 },
    GenGaussian { loc: f64, scale: f64, shape: f64 },
    BetaLike { alpha: f64, beta: f64, nodes: usize },
    Table { xs: Vec<f64>, cdf: Vec<f64> },
}

impl TryFrom<LawSpec> for UnivariateLaw {
    type Error = Error;

    fn try_from(spec: LawSpec) -> Result<Self> {
        match spec {
            LawSpec::Uniform { low, high } => Self::uniform(low, high),
            LawSpec::Gaussian { mean, std } => Self::gaussian(mean, std),
            LawSpec::Laplace { loc, scale } => Self::laplace(loc, scale),
            LawSpec::GenGaussian { loc, scale, shape } => Self::gen_gaussian(loc, scale, shape),
            LawSpec::BetaLike { alpha, beta, nodes } => {
                Ok(Self::Tabulated(TabulatedLaw::beta_like(BetaShape {
                    alpha,
                    beta,
                    nodes,
                })?))
            }
            LawSpec::Table { xs, cdf } => Ok(Self::Tabulated(TabulatedLaw::new(xs, cdf)?)),
        }
    }
}

impl From<UnivariateLaw> for LawSpec {
    fn from(law: UnivariateLaw) -> Self {
        match law {
            UnivariateLaw::Uniform { low, high } => LawSpec::Uniform { low, high },
            UnivariateLaw::Gaussian { mean, std } => LawSpec::Gaussian { mean, std },
            UnivariateLaw::Laplace { loc, scale } => LawSpec::Laplace { loc, scale },
            UnivariateLaw::GenGaussian { loc, scale, shape } => {
                LawSpec::GenGaussian { loc, scale, shape }
            }
            UnivariateLaw::Tabulated(t) => match t.origin {
                Some(BetaShape { alpha, beta, nodes }) => LawSpec::BetaLike { alpha, beta, nodes },
                None => LawSpec::Table {
                    xs: t.xs,
                    cdf: t.cdf,
                },
            },
        }
    }
}

fn finite_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

impl UnivariateLaw {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        finite("low", low)?;
        finite("high", high)?;
        if high <= low {
            return Err(Error::domain("uniform law needs low < high"));
        }
        Ok(Self::Uniform { low, high })
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        finite("mean", mean)?;
        finite_positive("std", std)?;
        Ok(Self::Gaussian { mean, std })
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        finite("loc", loc)?;
        finite_positive("scale", scale)?;
        Ok(Self::Laplace { loc, scale })
    }

    pub fn gen_gaussian(loc: f64, scale: f64, shape: f64) -> Result<Self> {
        finite("loc", loc)?;
        finite_positive("scale", scale)?;
        if !(1.0..=20.0).contains(&shape) {
            return Err(Error::domain(format!(
                "shape must lie in [1, 20], got {shape}"
            )));
        }
        Ok(Self::GenGaussian { loc, scale, shape })
    }

    pub fn standard_gaussian() -> Self {
        Self::Gaussian {
            mean: 0.0,
            std: 1.0,
        }
    }

    pub fn unit_uniform() -> Self {
        Self::Uniform {
            low: 0.0,
            high: 1.0,
        }
    }

    pub fn standard_laplace() -> Self {
        Self::Laplace {
            loc: 0.0,
            scale: 1.0,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Self::Gaussian { .. })
    }

    /// Closed support `[lo, hi]` (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { low, high } => (*low, *high),
            Self::Tabulated(t) => (t.xs[0], t.xs[t.xs.len() - 1]),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// True when `x` is strictly inside the support.
    pub fn in_open_support(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x.is_finite() && x > lo && x < hi
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { low, high } => {
                if x >= *low && x <= *high {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Self::Gaussian { mean, std } => std_normal_pdf((x - mean) / std) / std,
            Self::Laplace { loc, scale } => (-(x - loc).abs() / scale).exp() / (2.0 * scale),
            Self::GenGaussian { loc, scale, shape } => {
                let t = (x - loc).abs() / scale;
                let log_norm = shape.ln() - (2.0 * scale).ln() - ln_gamma(1.0 / shape);
                (log_norm - t.powf(*shape)).exp()
            }
            Self::Tabulated(t) => t.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Self::Gaussian { mean, std } => std_normal_cdf((x - mean) / std),
            Self::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Self::GenGaussian { loc, .. } => {
                if x < *loc {
                    self.gen_gaussian_tail(x)
                } else {
                    1.0 - self.gen_gaussian_tail(x)
                }
            }
            Self::Tabulated(t) => t.cdf(x),
        }
    }

    /// Survival function `1 − cdf(x)`, computed without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mean, std } => std_normal_cdf(-(x - mean) / std),
            Self::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z > 0.0 {
                    0.5 * (-z).exp()
                } else {
                    1.0 - 0.5 * z.exp()
                }
            }
            Self::GenGaussian { loc, .. } => {
                if x > *loc {
                    self.gen_gaussian_tail(x)
                } else {
                    1.0 - self.gen_gaussian_tail(x)
                }
            }
            Self::Uniform { low, high } => ((high - x) / (high - low)).clamp(0.0, 1.0),
            Self::Tabulated(t) => 1.0 - t.cdf(x),
        }
    }

    // Mass beyond |x − loc| on one side.
    fn gen_gaussian_tail(&self, x: f64) -> f64 {
        let Self::GenGaussian { loc, scale, shape } = self else {
            unreachable!()
        };
        let t = ((x - loc).abs() / scale).powf(*shape);
        if t == 0.0 {
            0.5
        } else {
            0.5 * gamma_ur(1.0 / shape, t)
        }
    }

    /// `x` with `cdf(x) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "quantile level must lie in (0, 1), got {u}"
            )));
        }
        Ok(match self {
            Self::Uniform { low, high } => low + u * (high - low),
            Self::Gaussian { mean, std } => mean + std * std_normal_quantile(u),
            Self::Laplace { loc, scale } => {
                if u < 0.5 {
                    loc + scale * (2.0 * u).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - u)).ln()
                }
            }
            Self::GenGaussian { loc, scale, .. } => {
                let lo = loc - BRACKET_HALF_WIDTH * scale;
                let hi = loc + BRACKET_HALF_WIDTH * scale;
                self.solve_increasing(|x| self.cdf(x) - u, lo, hi, *scale)
            }
            Self::Tabulated(t) => t.quantile(u),
        })
    }

    /// `x` with `sf(x) = q`; precise for small `q`.
    pub fn quantile_upper(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!(
                "tail level must lie in (0, 1), got {q}"
            )));
        }
        match self {
            Self::Uniform { low, high } => Ok(high - q * (high - low)),
            Self::Gaussian { mean, .. } | Self::Laplace { loc: mean, .. } => {
                Ok(2.0 * mean - self.quantile(q)?)
            }
            Self::GenGaussian { loc, .. } => Ok(2.0 * loc - self.quantile(q)?),
            Self::Tabulated(t) => Ok(t.quantile(1.0 - q)),
        }
    }

    /// Bracketed bisection to `BISECTION_TOL · scale`, then two Newton steps on
    /// the density. `g` must be increasing.
    fn solve_increasing(
        &self,
        g: impl Fn(f64) -> f64,
        mut lo: f64,
        mut hi: f64,
        scale: f64,
    ) -> f64 {
        let mut widen = 0;
        while g(lo) > 0.0 && widen < 8 {
            lo -= BRACKET_HALF_WIDTH * scale * (1 << widen) as f64;
            widen += 1;
        }
        widen = 0;
        while g(hi) < 0.0 && widen < 8 {
            hi += BRACKET_HALF_WIDTH * scale * (1 << widen) as f64;
            widen += 1;
        }
        for _ in 0..BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= BISECTION_TOL * scale {
                break;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..2 {
            let p = self.pdf(x);
            if p > 0.0 {
                let step = g(x) / p;
                let next = x - step;
                if next >= lo - BISECTION_TOL * scale && next <= hi + BISECTION_TOL * scale {
                    x = next;
                }
            }
        }
        x
    }

    /// Normal score `Φ⁻¹(F(x))`, taken through the survival function in the
    /// upper half. Returns the score and whether the clamp was applied.
    pub fn normal_score(&self, x: f64) -> (f64, bool) {
        let u = self.cdf(x);
        if u <= 0.5 {
            let c = u.max(CDF_CLAMP);
            (std_normal_quantile(c), c != u)
        } else {
            let q = self.sf(x);
            let c = q.max(CDF_CLAMP);
            (-std_normal_quantile(c), c != q)
        }
    }

    /// Inverse of [`normal_score`](Self::normal_score): `F⁻¹(Φ(z))`.
    pub fn from_normal_score(&self, z: f64) -> Result<(f64, bool)> {
        if z <= 0.0 {
            let u = std_normal_cdf(z);
            let c = u.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
            Ok((self.quantile(c)?, c != u))
        } else {
            let q = std_normal_cdf(-z);
            let c = q.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
            Ok((self.quantile_upper(c)?, c != q))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform { low, high } => low + (high - low) * rng.sample::<f64, _>(Open01),
            Self::Gaussian { mean, std } => mean + std * rng.sample::<f64, _>(StandardNormal),
            Self::Laplace { loc, scale } => {
                // Inverse CDF on (0, 1), excluding the endpoint 0.
                let u: f64 = 1.0 - rng.random::<f64>();
                let e = -u.ln();
                if rng.random::<bool>() {
                    loc + scale * e
                } else {
                    loc - scale * e
                }
            }
            Self::GenGaussian { loc, scale, shape } => {
                let g = Gamma::new(1.0 / shape, 1.0).expect("valid shape");
                let t = g.sample(rng).powf(1.0 / shape);
                if rng.random::<bool>() {
                    loc + scale * t
                } else {
                    loc - scale * t
                }
            }
            Self::Tabulated(t) => {
                let u: f64 = rng.random::<f64>();
                t.quantile(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
            }
        }
    }

    /// Lower regularised incomplete gamma, exposed for tests of the
    /// generalised Gaussian CDF.
    #[doc(hidden)]
    pub fn gamma_lr(a: f64, x: f64) -> f64 {
        gamma_lr(a, x)
    }
}

/// Product of independent univariate laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorialDistribution {
    components: Vec<UnivariateLaw>,
}

impl FactorialDistribution {
    pub fn new(components: Vec<UnivariateLaw>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain(
                "a factorial distribution needs at least one component",
            ));
        }
        Ok(Self { components })
    }

    pub fn iid(law: UnivariateLaw, d: usize) -> Result<Self> {
        Self::new(vec![law; d])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[UnivariateLaw] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &UnivariateLaw {
        &self.components[i]
    }

    /// Joint density, the product of the component densities.
    pub fn pdf(&self, s: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(s)
            .map(|(l, &x)| l.pdf(x))
            .product()
    }

    /// Bounding box of the support.
    pub fn support_box(&self) -> Vec<(f64, f64)> {
        self.components.iter().map(UnivariateLaw::support).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.components.iter().map(|l| l.sample(rng)).collect()
    }
}

/// Draws per seeding chunk in [`sample_factorial`].
pub const SAMPLE_CHUNK: usize = 1024;

/// `n` i.i.d. draws from `p_s`. Chunk `c` of [`SAMPLE_CHUNK`] draws uses the
/// sub-seed `mix(seed, c)`, so the output does not depend on the thread pool.
pub fn sample_factorial(p_s: &FactorialDistribution, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok((0..n.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(mix_seed(seed, c as u64));
            let len = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
            (0..len).map(|_| p_s.sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat())
}

/// Law of the column norm of a spherically symmetric sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum RadialLaw {
    /// Every column has unit norm.
    Unit,
    /// Chi law; `dof = None` uses the ambient dimension, which makes the
    /// columns standard Gaussian vectors.
    Chi { dof: Option<usize> },
    /// Any law supported on the non-negative reals.
    Law(UnivariateLaw),
}

impl Default for RadialLaw {
    fn default() -> Self {
        RadialLaw::Chi { dof: None }
    }
}

/// Spherically symmetric sampler on `R^m`: radius × uniform direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalSampler {
    ambient_dim: usize,
    #[serde(default)]
    radial: RadialLaw,
}

impl SphericalSampler {
    pub fn new(ambient_dim: usize, radial: RadialLaw) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::domain("ambient dimension must be positive"));
        }
        match &radial {
            RadialLaw::Chi { dof: Some(0) } => {
                return Err(Error::domain("chi law needs positive degrees of freedom"))
            }
            RadialLaw::Law(l) => {
                let (lo, _) = l.support();
                if lo < 0.0 {
                    return Err(Error::domain("radial law must be supported on [0, ∞)"));
                }
            }
            _ => {}
        }
        Ok(Self {
            ambient_dim,
            radial,
        })
    }

    /// Standard Gaussian columns.
    pub fn gaussian(ambient_dim: usize) -> Result<Self> {
        Self::new(ambient_dim, RadialLaw::Chi { dof: None })
    }

    pub fn unit(ambient_dim: usize) -> Result<Self> {
        Self::new(ambient_dim, RadialLaw::Unit)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn radial(&self) -> &RadialLaw {
        &self.radial
    }

    /// Same radial law in another ambient dimension.
    pub fn with_ambient_dim(&self, m: usize) -> Result<Self> {
        Self::new(m, self.radial.clone())
    }

    /// Uniform direction on the unit sphere, from a normalised Gaussian.
    pub fn direction<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        loop {
            let g: Vec<f64> = (0..self.ambient_dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                return (g.into_iter().map(|v| v / norm).collect(), norm);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (u, gauss_norm) = self.direction(rng);
        let r = match &self.radial {
            RadialLaw::Unit => 1.0,
            RadialLaw::Chi { dof: None } => gauss_norm,
            RadialLaw::Chi { dof: Some(k) } if *k == self.ambient_dim => gauss_norm,
            RadialLaw::Chi { dof: Some(k) } => ChiSquared::new(*k as f64)
                .expect("positive dof")
                .sample(rng)
                .sqrt(),
            RadialLaw::Law(l) => l.sample(rng),
        };
        u.into_iter().map(|v| r * v).collect()
    }

    /// `d` independent columns as an `m × d` matrix (no rank check).
    pub fn sample_columns<R: Rng + ?Sized>(&self, rng: &mut R, d: usize) -> DenseMatrix {
        let m = self.ambient_dim;
        let mut data = nalgebra::DMatrix::zeros(m, d);
        for c in 0..d {
            let col = self.sample(rng);
            for (r, v) in col.into_iter().enumerate() {
                data[(r, c)] = v;
            }
        }
        DenseMatrix::new(data).expect("finite samples")
    }
}

/// Number of redraws attempted after a rank-deficient draw.
pub const RANK_RETRIES: u64 = 3;

/// `m × d` matrix with i.i.d. spherically symmetric columns and full column rank.
pub fn sample_isotropic_matrix(
    m: usize,
    d: usize,
    sampler: &SphericalSampler,
    seed: u64,
) -> Result<DenseMatrix> {
    if d == 0 || m < d {
        return Err(Error::domain(format!(
            "need 1 ≤ d ≤ m, got m = {m}, d = {d}"
        )));
    }
    if sampler.ambient_dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: sampler.ambient_dim(),
        });
    }
    let mut last = Error::RankDeficient {
        ratio: 0.0,
        tol: RANK_TOL,
    };
    for attempt in 0..=RANK_RETRIES {
        let mut rng = rng_from_seed(mix_seed(seed, attempt));
        let j = sampler.sample_columns(&mut rng, d);
        match j.check_full_column_rank(RANK_TOL) {
            Ok(()) => return Ok(j),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laws() -> Vec<UnivariateLaw> {
        vec![
            UnivariateLaw::unit_uniform(),
            UnivariateLaw::uniform(-2.0, 3.0).unwrap(),
            UnivariateLaw::standard_gaussian(),
            UnivariateLaw::gaussian(1.5, 0.3).unwrap(),
            UnivariateLaw::standard_laplace(),
            UnivariateLaw::laplace(-1.0, 2.0).unwrap(),
            UnivariateLaw::gen_gaussian(0.0, 1.0, 1.5).unwrap(),
            UnivariateLaw::gen_gaussian(0.5, 2.0, 4.0).unwrap(),
            UnivariateLaw::Tabulated(
                TabulatedLaw::beta_like(BetaShape {
                    alpha: 2.0,
                    beta: 5.0,
                    nodes: 257,
                })
                .unwrap(),
            ),
        ]
    }

    #[test]
    fn quantile_examples() {
        let g = UnivariateLaw::standard_gaussian();
        assert!(g.quantile(0.5).unwrap().abs() < 1e-15);
        assert_eq!(UnivariateLaw::unit_uniform().quantile(0.25).unwrap(), 0.25);
        let x = UnivariateLaw::standard_laplace().quantile(0.9).unwrap();
        // −log(0.2), rounded from a 40-digit value.
        assert!((x - 1.609_437_912_434_100_4).abs() < 1e-14);
        assert!(g.quantile(0.0).is_err());
        assert!(g.quantile(1.0).is_err());
        assert!(g.quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_inverts_cdf_to_tight_tolerance() {
        for law in laws() {
            for i in 1..1000 {
                let u = 1e-6 + (1.0 - 2e-6) * i as f64 / 1000.0;
                let x = law.quantile(u).unwrap();
                assert!((law.cdf(x) - u).abs() <= 1e-12, "{law:?} at u = {u}");
            }
            for &u in &[1e-6, 0.5, 1.0 - 1e-6] {
                let x = law.quantile(u).unwrap();
                assert!((law.cdf(x) - u).abs() <= 1e-12, "{law:?} at u = {u}");
            }
        }
    }

    #[test]
    fn cdf_is_nondecreasing() {
        for law in laws() {
            let mut last = 0.0;
            for i in 0..2000 {
                let x = -12.0 + 24.0 * i as f64 / 2000.0;
                let c = law.cdf(x);
                assert!(c >= last && (0.0..=1.0).contains(&c));
                last = c;
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for law in laws() {
            let (lo, hi) = law.support();
            let (lo, hi) = (lo.max(-60.0), hi.min(60.0));
            // Composite Simpson on a fine grid; kinks only cost O(h²).
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut acc = law.pdf(lo) + law.pdf(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * law.pdf(lo + i as f64 * h);
            }
            let mass = acc * h / 3.0;
            assert!((mass - 1.0).abs() < 1e-6, "{law:?}: {mass}");
        }
    }

    #[test]
    fn normal_scores_round_trip_in_both_tails() {
        for law in laws() {
            for &u in &[1e-9, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
                let x = law.quantile(u).unwrap();
                let (z, clamped) = law.normal_score(x);
                assert!(!clamped);
                let (back, _) = law.from_normal_score(z).unwrap();
                let scale = 1.0 + x.abs();
                assert!((back - x).abs() < 1e-8 * scale, "{law:?}: {x} vs {back}");
            }
        }
    }

    #[test]
    fn normal_score_clamps_far_tail() {
        let law = UnivariateLaw::standard_laplace();
        let (z, clamped) = law.normal_score(60.0);
        assert!(clamped);
        assert!((z - (-std_normal_quantile(CDF_CLAMP))).abs() < 1e-12);
    }

    #[test]
    fn law_json_uses_kind_and_params() {
        let law = UnivariateLaw::laplace(0.0, 2.0).unwrap();
        let json = serde_json::to_string(&law).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"laplace","params":{"loc":0.0,"scale":2.0}}"#
        );
        let back: UnivariateLaw = serde_json::from_str(&json).unwrap();
        assert_eq!(back, law);

        let bad = r#"{"kind":"laplace","params":{"loc":0.0,"scale":-2.0}}"#;
        assert!(serde_json::from_str::<UnivariateLaw>(bad).is_err());
        let unknown = r#"{"kind":"laplace","params":{"loc":0.0,"scale":1.0,"shape":3}}"#;
        assert!(serde_json::from_str::<UnivariateLaw>(unknown).is_err());

        let beta = r#"{"kind":"beta_like","params":{"alpha":2.0,"beta":3.0,"nodes":64}}"#;
        let law: UnivariateLaw = serde_json::from_str(beta).unwrap();
        assert_eq!(serde_json::to_string(&law).unwrap(), beta);
    }

    #[test]
    fn sample_factorial_shape_and_determinism() {
        let p = FactorialDistribution::iid(UnivariateLaw::standard_gaussian(), 1).unwrap();
        let one = sample_factorial(&p, 1, 5).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].len(), 1);
        let p2 = FactorialDistribution::iid(UnivariateLaw::standard_laplace(), 3).unwrap();
        assert_eq!(
            sample_factorial(&p2, 50, 9).unwrap(),
            sample_factorial(&p2, 50, 9).unwrap()
        );
        assert_ne!(
            sample_factorial(&p2, 50, 9).unwrap(),
            sample_factorial(&p2, 50, 10).unwrap()
        );
        assert!(sample_factorial(&p2, 0, 9).is_err());
    }

    #[test]
    fn uniform_sample_means_match_law_of_large_numbers() {
        let p = FactorialDistribution::iid(UnivariateLaw::unit_uniform(), 2).unwrap();
        let draws = sample_factorial(&p, 100_000, 21).unwrap();
        for k in 0..2 {
            let mean = draws.iter().map(|s| s[k]).sum::<f64>() / draws.len() as f64;
            assert!((mean - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn unit_radial_law_gives_unit_columns() {
        let sampler = SphericalSampler::unit(10).unwrap();
        let j = sample_isotropic_matrix(10, 3, &sampler, 1234).unwrap();
        for c in 0..3 {
            assert!((j.column(c).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_columns_have_full_rank_and_are_deterministic() {
        let sampler = SphericalSampler::new(10, RadialLaw::Chi { dof: Some(10) }).unwrap();
        let j = sample_isotropic_matrix(10, 3, &sampler, 7).unwrap();
        assert_eq!(j.rank(RANK_TOL), 3);
        let again = sample_isotropic_matrix(10, 3, &sampler, 7).unwrap();
        assert_eq!(j, again);
    }

    #[test]
    fn isotropic_matrix_argument_checks() {
        let sampler = SphericalSampler::gaussian(4).unwrap();
        assert!(sample_isotropic_matrix(4, 5, &sampler, 0).is_err());
        assert!(matches!(
            sample_isotropic_matrix(5, 2, &sampler, 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(
            SphericalSampler::new(3, RadialLaw::Law(UnivariateLaw::standard_gaussian())).is_err()
        );
    }
}
