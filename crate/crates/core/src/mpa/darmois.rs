//! Tabulated two-dimensional Darmois construction
//! `g(x) = (F₁(x₁), F₂|₁(x₂ | x₁))`.
//!
//! The joint density is integrated on a uniform grid over a rectangle. Each
//! row `x₁ = const` carries a cumulative conditional table; between nodes in
//! `x₂` the table is interpolated by a monotone cubic Hermite spline whose
//! node slopes are the exact normalised density, and rows are blended
//! linearly in `x₁`. Both stages are strictly increasing, so the inverse is
//! found by bisection.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{std_normal_pdf, FactorialDistribution};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mixing::{Domain, MixingMap};

pub const DEFAULT_RESOLUTION: usize = 1024;
pub const MIN_RESOLUTION: usize = 128;
const MASS_TOL: f64 = 1e-4;
const INDEPENDENT_TAIL: f64 = 1e-10;
const ROTATED_TAIL: f64 = 1e-7;
const GAUSSIAN_HALF_WIDTH: f64 = 8.5;
const BISECTION_STEPS: usize = 64;

/// Joint densities on `R²` accepted by [`DarmoisMap::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `p₁(x₁) p₂(x₂)`.
    Independent { components: FactorialDistribution },
    /// Standard bivariate Gaussian with correlation `rho`.
    CorrelatedGaussian { rho: f64 },
    /// Law of `x = O s` for factorial `s`: `p(x) = p_s(Oᵀx)`.
    RotatedFactorial {
        rotation: DenseMatrix,
        sources: FactorialDistribution,
    },
}

impl DensitySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DensitySpec::Independent { components } => {
                if components.dim() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        got: components.dim(),
                    });
                }
            }
            DensitySpec::CorrelatedGaussian { rho } => {
                if !(rho.abs() < 1.0) {
                    return Err(Error::domain(format!(
                        "correlation must lie in (−1, 1), got {rho}"
                    )));
                }
            }
            DensitySpec::RotatedFactorial { rotation, sources } => {
                if sources.dim() != 2 || rotation.rows() != 2 || rotation.cols() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        got: sources.dim().max(rotation.rows()),
                    });
                }
                if rotation.orthonormality_defect() > 1e-12 {
                    return Err(Error::domain("rotation is not orthogonal"));
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x1: f64, x2: f64) -> f64 {
        match self {
            DensitySpec::Independent { components } => components.pdf(&[x1, x2]),
            DensitySpec::CorrelatedGaussian { rho } => {
                let v = 1.0 - rho * rho;
                let q = (x1 * x1 - 2.0 * rho * x1 * x2 + x2 * x2) / v;
                (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * v.sqrt())
            }
            DensitySpec::RotatedFactorial { rotation, sources } => {
                let o = rotation.as_dmatrix();
                let s1 = o[(0, 0)] * x1 + o[(1, 0)] * x2;
                let s2 = o[(0, 1)] * x1 + o[(1, 1)] * x2;
                sources.pdf(&[s1, s2])
            }
        }
    }

    /// Rectangle holding all but a negligible part of the mass.
    pub fn default_rectangle(&self) -> Result<[(f64, f64); 2]> {
        match self {
            DensitySpec::Independent { components } => {
                let mut r = [(0.0, 0.0); 2];
                for (i, law) in components.components().iter().enumerate() {
                    let (lo, hi) = law.support();
                    r[i] = (
                        if lo.is_finite() {
                            lo
                        } else {
                            law.quantile(INDEPENDENT_TAIL)?
                        },
                        if hi.is_finite() {
                            hi
                        } else {
                            law.quantile_upper(INDEPENDENT_TAIL)?
                        },
                    );
                }
                Ok(r)
            }
            DensitySpec::CorrelatedGaussian { .. } => {
                Ok([(-GAUSSIAN_HALF_WIDTH, GAUSSIAN_HALF_WIDTH); 2])
            }
            DensitySpec::RotatedFactorial { sources, .. } => {
                let mut half: f64 = 0.0;
                for law in sources.components() {
                    half = half
                        .max(law.quantile(ROTATED_TAIL)?.abs())
                        .max(law.quantile_upper(ROTATED_TAIL)?.abs());
                }
                Ok([(-half, half); 2])
            }
        }
    }
}

/// Tabulated Darmois map on a rectangle.
#[derive(Debug, Clone)]
pub struct DarmoisMap {
    density: DensitySpec,
    rect: [(f64, f64); 2],
    n: usize,
    h: [f64; 2],
    mass: f64,
    marginal_cdf: Vec<f64>,
    marginal_pdf: Vec<f64>,
    row_mass: Vec<f64>,
    /// Row-major `n × n`: entry `(i, j)` is `F(x₂_j | x₁_i)`.
    cond_cdf: Vec<f64>,
}

/// Monotone cubic Hermite piece on `[0, 1]` in local coordinate `t`;
/// returns the value and the derivative with respect to `x`.
fn hermite(y0: f64, y1: f64, mut m0: f64, mut m1: f64, h: f64, t: f64) -> (f64, f64) {
    let delta = (y1 - y0) / h;
    if delta <= 0.0 {
        return (y0, 0.0);
    }
    let (a, b) = (m0 / delta, m1 / delta);
    let r = a * a + b * b;
    if r > 9.0 {
        let tau = 3.0 / r.sqrt();
        m0 = tau * a * delta;
        m1 = tau * b * delta;
    }
    let (t2, t3) = (t * t, t * t * t);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1;
    let dv = ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * h * m0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * h * m1)
        / h;
    (v, dv)
}

impl DarmoisMap {
    /// Tables on the density's default rectangle.
    pub fn build(density: DensitySpec, resolution: usize) -> Result<Self> {
        let rect = density.default_rectangle()?;
        Self::build_on(density, rect, resolution)
    }

    pub fn build_on(
        density: DensitySpec,
        rect: [(f64, f64); 2],
        resolution: usize,
    ) -> Result<Self> {
        density.validate()?;
        if resolution < MIN_RESOLUTION {
            return Err(Error::domain(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
            )));
        }
        if rect
            .iter()
            .any(|&(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::domain("rectangle needs finite lo < hi on both axes"));
        }
        let n = resolution;
        let h = [
            (rect[0].1 - rect[0].0) / (n - 1) as f64,
            (rect[1].1 - rect[1].0) / (n - 1) as f64,
        ];
        let x2 = |j: usize| rect[1].0 + j as f64 * h[1];
        let pdf = |a: f64, b: f64| -> Result<f64> {
            let p = density.pdf(a, b);
            if p > 0.0 && p.is_finite() {
                Ok(p)
            } else {
                Err(Error::NonPositiveDensity { x1: a, x2: b })
            }
        };
        // Cumulative Simpson along x₂ for a fixed x₁; writes into `out` when given.
        let row = |a: f64, out: Option<&mut [f64]>| -> Result<f64> {
            let mut acc = 0.0;
            let mut prev = pdf(a, x2(0))?;
            let mut out = out;
            if let Some(o) = out.as_deref_mut() {
                o[0] = 0.0;
            }
            for j in 0..n - 1 {
                let mid = pdf(a, x2(j) + 0.5 * h[1])?;
                let next = pdf(a, x2(j + 1))?;
                acc += h[1] / 6.0 * (prev + 4.0 * mid + next);
                if let Some(o) = out.as_deref_mut() {
                    o[j + 1] = acc;
                }
                prev = next;
            }
            Ok(acc)
        };

        let mut cond_cdf = vec![0.0; n * n];
        let mut row_mass = vec![0.0; n];
        for i in 0..n {
            let a = rect[0].0 + i as f64 * h[0];
            let slice = &mut cond_cdf[i * n..(i + 1) * n];
            let mass = row(a, Some(slice))?;
            for v in slice.iter_mut() {
                *v /= mass;
            }
            slice[n - 1] = 1.0;
            row_mass[i] = mass;
        }
        let mut marginal_cdf = vec![0.0; n];
        for i in 0..n - 1 {
            let a = rect[0].0 + (i as f64 + 0.5) * h[0];
            let mid = row(a, None)?;
            marginal_cdf[i + 1] =
                marginal_cdf[i] + h[0] / 6.0 * (row_mass[i] + 4.0 * mid + row_mass[i + 1]);
        }
        let mass = marginal_cdf[n - 1];
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Normalization {
                mass,
                tol: MASS_TOL,
            });
        }
        for v in marginal_cdf.iter_mut() {
            *v /= mass;
        }
        marginal_cdf[n - 1] = 1.0;
        let marginal_pdf = row_mass.iter().map(|r| r / mass).collect();

        Ok(Self {
            density,
            rect,
            n,
            h,
            mass,
            marginal_cdf,
            marginal_pdf,
            row_mass,
            cond_cdf,
        })
    }

    pub fn density(&self) -> &DensitySpec {
        &self.density
    }

    pub fn rectangle(&self) -> [(f64, f64); 2] {
        self.rect
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Quadrature mass of the density on the rectangle.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn node(&self, axis: usize, i: usize) -> f64 {
        self.rect[axis].0 + i as f64 * self.h[axis]
    }

    fn locate(&self, axis: usize, x: f64) -> (usize, f64) {
        let u = (x - self.rect[axis].0) / self.h[axis];
        let i = (u.floor().max(0.0) as usize).min(self.n - 2);
        (i, (u - i as f64).clamp(0.0, 1.0))
    }

    fn strictly_inside(&self, x1: f64, x2: f64) -> bool {
        x1 > self.rect[0].0 && x1 < self.rect[0].1 && x2 > self.rect[1].0 && x2 < self.rect[1].1
    }

    /// `F₁(x₁)` and its derivative.
    fn g1(&self, x1: f64) -> (f64, f64) {
        let (i, t) = self.locate(0, x1);
        hermite(
            self.marginal_cdf[i],
            self.marginal_cdf[i + 1],
            self.marginal_pdf[i],
            self.marginal_pdf[i + 1],
            self.h[0],
            t,
        )
    }

    fn row_eval(&self, i: usize, x2: f64) -> (f64, f64) {
        let (j, t) = self.locate(1, x2);
        let a = self.node(0, i);
        let c = &self.cond_cdf[i * self.n..];
        let m0 = self.density.pdf(a, self.node(1, j)) / self.row_mass[i];
        let m1 = self.density.pdf(a, self.node(1, j + 1)) / self.row_mass[i];
        hermite(c[j], c[j + 1], m0, m1, self.h[1], t)
    }

    /// `F(x₂ | x₁)` and its derivative in `x₂`.
    fn g2(&self, x1: f64, x2: f64) -> (f64, f64) {
        let (i, t) = self.locate(0, x1);
        let (c0, d0) = self.row_eval(i, x2);
        let (c1, d1) = self.row_eval(i + 1, x2);
        ((1.0 - t) * c0 + t * c1, (1.0 - t) * d0 + t * d1)
    }

    fn open_unit(v: f64) -> f64 {
        v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    }

    /// `g(x)`, strictly inside `(0,1)²`.
    pub fn forward(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let [x1, x2] = x;
        if !self.strictly_inside(x1, x2) {
            return Err(Error::OutOfTable { x1, x2 });
        }
        Ok([
            Self::open_unit(self.g1(x1).0),
            Self::open_unit(self.g2(x1, x2).0),
        ])
    }

    /// Lower-triangular Jacobian of `g`; the `(2,1)` entry is a difference
    /// quotient over one grid cell, one-sided near the table edges.
    pub fn jacobian_at(&self, x: [f64; 2]) -> Result<DMatrix<f64>> {
        let [x1, x2] = x;
        if !self.strictly_inside(x1, x2) {
            return Err(Error::OutOfTable { x1, x2 });
        }
        let p1 = self.g1(x1).1;
        let (c, p2) = self.g2(x1, x2);
        let h = self.h[0];
        let (lo, hi) = self.rect[0];
        let d21 = if x1 - h >= lo && x1 + h <= hi {
            (self.g2(x1 + h, x2).0 - self.g2(x1 - h, x2).0) / (2.0 * h)
        } else if x1 + h <= hi {
            (self.g2(x1 + h, x2).0 - c) / h
        } else {
            (c - self.g2(x1 - h, x2).0) / h
        };
        Ok(DMatrix::from_row_slice(2, 2, &[p1, 0.0, d21, p2]))
    }

    fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `g⁻¹(u)` for `u ∈ (0,1)²`.
    pub fn inverse(&self, u: [f64; 2]) -> Result<[f64; 2]> {
        if !u.iter().all(|&v| v > 0.0 && v < 1.0) {
            return Err(Error::OutOfDomain { point: u.to_vec() });
        }
        let (a1, b1) = self.rect[0];
        let (a2, b2) = self.rect[1];
        let x1 = Self::bisect(a1, b1, u[0], |x| self.g1(x).0);
        let x2 = Self::bisect(a2, b2, u[1], |y| self.g2(x1, y).0);
        Ok([x1, x2])
    }

    /// Writes the marginal and conditional tables as
    /// `table,i,j,x1,x2,value` rows.
    pub fn write_tables_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["table", "i", "j", "x1", "x2", "value"])?;
        for i in 0..self.n {
            w.write_record(&[
                "marginal_cdf".to_string(),
                i.to_string(),
                String::new(),
                self.node(0, i).to_string(),
                String::new(),
                self.marginal_cdf[i].to_string(),
            ])?;
        }
        for i in 0..self.n {
            for j in 0..self.n {
                w.write_record(&[
                    "conditional_cdf".to_string(),
                    i.to_string(),
                    j.to_string(),
                    self.node(0, i).to_string(),
                    self.node(1, j).to_string(),
                    self.cond_cdf[i * self.n + j].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `g(x)`.
pub fn darmois_build(density: DensitySpec, resolution: usize) -> Result<DarmoisMap> {
    DarmoisMap::build(density, resolution)
}

/// Jacobian of `g` at `x`, `(1,2)` entry exactly zero.
pub fn darmois_jacobian(dm: &DarmoisMap, x: [f64; 2]) -> Result<DenseMatrix> {
    DenseMatrix::new(dm.jacobian_at(x)?)
}

fn pair(s: &[f64]) -> [f64; 2] {
    [s[0], s[1]]
}

impl MixingMap for DarmoisMap {
    fn latent_dim(&self) -> usize {
        2
    }

    fn observed_dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Domain {
        Domain::Box(self.rect.to_vec())
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_row_slice(&self.forward(pair(s))?))
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        darmois_jacobian(self, pair(s))
    }
}

/// `g⁻¹: (0,1)² → R²`, with the Jacobian obtained by inverting the
/// triangular forward Jacobian.
#[derive(Debug, Clone)]
pub struct DarmoisInverse {
    map: Arc<DarmoisMap>,
}

impl DarmoisInverse {
    pub fn new(map: Arc<DarmoisMap>) -> Self {
        Self { map }
    }

    pub fn map(&self) -> &DarmoisMap {
        &self.map
    }
}

impl MixingMap for DarmoisInverse {
    fn latent_dim(&self) -> usize {
        2
    }

    fn observed_dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Domain {
        Domain::OpenUnitCube
    }

    fn eval_in_domain(&self, u: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_row_slice(&self.map.inverse(pair(u))?))
    }

    fn jacobian_in_domain(&self, u: &[f64]) -> Result<DenseMatrix> {
        let x = self.map.inverse(pair(u))?;
        let j = self.map.jacobian_at(x)?;
        let (a, c, b) = (j[(0, 0)], j[(1, 0)], j[(1, 1)]);
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::NonPositiveDensity { x1: x[0], x2: x[1] });
        }
        DenseMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[1.0 / a, 0.0, -c / (a * b), 1.0 / b],
        ))
    }
}

/// Closed-form conditional CDF of the standard bivariate Gaussian.
pub fn gaussian_conditional_cdf(rho: f64, x1: f64, x2: f64) -> f64 {
    crate::distributions::std_normal_cdf((x2 - rho * x1) / (1.0 - rho * rho).sqrt())
}

/// `∂/∂x₁` of [`gaussian_conditional_cdf`].
pub fn gaussian_conditional_cdf_dx1(rho: f64, x1: f64, x2: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    -rho / s * std_normal_pdf((x2 - rho * x1) / s)
}
