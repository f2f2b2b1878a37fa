//! Grid-wise piecewise-affine maps on `[0,1]^d` and their smoothed versions.
//!
//! Each coordinate runs through cells `(tδ, (t+1)δ]`, `t = 0..p`, and column
//! `k` of block `J^(t)` is the slope of coordinate `k` inside cell `t`. The
//! map is a sum of coordinate-wise functions
//!
//! ```text
//! f(s) = Σ_k f_k(s_k),   f_k(s) = Σ_t A_t(s) w_t(s)
//! A_t(s) = J^(t)_k (s − tδ) + Σ_{i<t} J^(i)_k δ
//! w_t(s) = 1̃_ε(s − tδ) − 1̃_ε(s − (t+1)δ)
//! ```
//!
//! With `ε = 0` the weights are half-open cell indicators.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::{Domain, MixingMap};
use crate::distributions::SphericalSampler;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RANK_TOL};
use crate::seeding::{mix_seed, rng_from_seed};

/// Knots closer than this to a coordinate count as hit for `ε = 0` Jacobians.
const KNOT_TOL: f64 = 1e-14;

/// Relative tolerance of the construction-time continuity check.
const CONTINUITY_TOL: f64 = 1e-12;

/// Sinusoidal step of half-width `eps`.
pub fn smooth_step(s: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    Ok(step(s, eps))
}

/// Derivative of [`smooth_step`]; zero outside `(−eps, eps]`.
pub fn smooth_step_derivative(s: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    Ok(step_derivative(s, eps))
}

/// `eps = 0` falls back to the indicator of `s > 0`.
pub(crate) fn step(s: f64, eps: f64) -> f64 {
    if s <= -eps {
        0.0
    } else if s > eps {
        1.0
    } else {
        0.5 * (std::f64::consts::PI * s / (2.0 * eps)).sin() + 0.5
    }
}

pub(crate) fn step_derivative(s: f64, eps: f64) -> f64 {
    if s <= -eps || s > eps {
        0.0
    } else {
        let a = std::f64::consts::PI / (2.0 * eps);
        0.5 * a * (a * s).cos()
    }
}

/// Number of blocks per axis, `⌈1/δ⌉ + 1`.
pub fn block_count(delta: f64) -> usize {
    // 1/δ is computed with round-off; an integer ratio must not gain a block.
    let r = 1.0 / delta;
    let n = r.round();
    let cells = if (r - n).abs() <= 1e-9 * n.max(1.0) {
        n
    } else {
        r.ceil()
    };
    cells as usize + 1
}

/// Smoothed grid-wise piecewise-affine map on `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct SmoothGridMap {
    delta: f64,
    eps: f64,
    blocks: Vec<DenseMatrix>,
    /// `Σ_{i<t} J^(i) δ` for each block `t`.
    offsets: Vec<DMatrix<f64>>,
    warnings: Vec<String>,
}

impl SmoothGridMap {
    /// Builds the map from `p = ⌈1/δ⌉ + 1` blocks of equal shape.
    ///
    /// Checks `eps < δ/4`, continuity at the knots and, when `m > p·d`, that
    /// the `p·d` block columns are jointly linearly independent.
    pub fn from_blocks(delta: f64, eps: f64, blocks: Vec<DenseMatrix>) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::domain(format!(
                "delta must lie in (0, 1], got {delta}"
            )));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!(
                "eps must be non-negative, got {eps}"
            )));
        }
        if eps > 0.0 && eps >= delta / 4.0 {
            return Err(Error::domain(format!(
                "eps = {eps} must be below delta/4 = {}",
                delta / 4.0
            )));
        }
        let p = block_count(delta);
        if blocks.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: blocks.len(),
            });
        }
        let (m, d) = (blocks[0].rows(), blocks[0].cols());
        if d == 0 || m < d {
            return Err(Error::domain(format!(
                "need 1 ≤ d ≤ m, got m = {m}, d = {d}"
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.rows() != m || b.cols() != d) {
            return Err(Error::DimensionMismatch {
                expected: m * d,
                got: b.rows() * b.cols(),
            });
        }

        let mut warnings = Vec::new();
        if m > p * d {
            let mut stacked = DMatrix::zeros(m, p * d);
            for (t, b) in blocks.iter().enumerate() {
                stacked.columns_mut(t * d, d).copy_from(b.as_dmatrix());
            }
            DenseMatrix::new(stacked)?.check_full_column_rank(RANK_TOL)?;
        } else {
            warnings.push(format!(
                "m = {m} ≤ p·d = {}; block columns cannot be jointly independent",
                p * d
            ));
        }

        let mut offsets = Vec::with_capacity(p);
        let mut acc = DMatrix::zeros(m, d);
        for b in &blocks {
            offsets.push(acc.clone());
            acc += b.as_dmatrix() * delta;
        }

        let map = Self {
            delta,
            eps,
            blocks,
            offsets,
            warnings,
        };
        map.check_knot_continuity()?;
        Ok(map)
    }

    /// Left and right affine pieces must agree at every interior knot.
    fn check_knot_continuity(&self) -> Result<()> {
        for t in 1..self.blocks.len() {
            let knot = t as f64 * self.delta;
            let left = self.piece(t - 1, knot);
            let right = self.piece(t, knot);
            let scale = left.abs().max().max(1.0);
            let gap = (left - right).abs().max();
            if gap > CONTINUITY_TOL * scale {
                return Err(Error::domain(format!(
                    "pieces disagree by {gap:e} at knot {knot}"
                )));
            }
        }
        Ok(())
    }

    /// `A_t(s)` for every column at once: column `k` is `A_t` of coordinate `k`.
    fn piece(&self, t: usize, s: f64) -> DMatrix<f64> {
        &self.offsets[t] + self.blocks[t].as_dmatrix() * (s - t as f64 * self.delta)
    }

    pub fn latent_dim(&self) -> usize {
        self.blocks[0].cols()
    }

    pub fn observed_dim(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Construction warnings, e.g. too few rows for joint independence.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Knot positions `tδ`, `t = 0..=p`.
    pub fn knots(&self) -> Vec<f64> {
        (0..=self.blocks.len())
            .map(|t| t as f64 * self.delta)
            .collect()
    }

    /// Same blocks with another smoothing width.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::from_blocks(self.delta, eps, self.blocks.clone())
    }

    /// Cell index of `s` under the half-open convention `(tδ, (t+1)δ]`;
    /// `s = 0` belongs to cell 0.
    pub fn cell_of(&self, s: f64) -> usize {
        let last = self.blocks.len() - 1;
        (1..=last)
            .take_while(|&t| s > t as f64 * self.delta)
            .count()
    }

    /// True when `s_k` lies strictly within `eps` of a knot inside `[0, 1]`.
    pub fn coordinate_in_boundary(&self, s_k: f64) -> bool {
        self.eps > 0.0 && self.knots().iter().any(|&k| (s_k - k).abs() < self.eps)
    }

    /// True when some coordinate lies in a blending window.
    pub fn in_boundary_region(&self, s: &[f64]) -> bool {
        s.iter().any(|&x| self.coordinate_in_boundary(x))
    }

    /// Length of `[0,1] ∩ ⋃ (knot − ε, knot + ε)` for one axis.
    pub fn boundary_measure_per_axis(&self) -> f64 {
        self.knots()
            .iter()
            .map(|&k| ((k + self.eps).min(1.0) - (k - self.eps).max(0.0)).max(0.0))
            .sum()
    }

    /// Probability that a uniform point of `[0,1]^d` falls in the boundary region.
    pub fn boundary_fraction(&self) -> f64 {
        1.0 - (1.0 - self.boundary_measure_per_axis()).powi(self.latent_dim() as i32)
    }

    /// `f_k(s_k)`, the contribution of coordinate `k`.
    pub fn coordinate_function(&self, k: usize, s_k: f64) -> DVector<f64> {
        let m = self.observed_dim();
        let mut out = DVector::zeros(m);
        if self.eps == 0.0 {
            let t = self.cell_of(s_k);
            if s_k > 0.0 {
                out += self.blocks[t].as_dmatrix().column(k) * (s_k - t as f64 * self.delta)
                    + self.offsets[t].column(k);
            }
            return out;
        }
        for t in 0..self.blocks.len() {
            let lo = t as f64 * self.delta;
            let w = step(s_k - lo, self.eps) - step(s_k - lo - self.delta, self.eps);
            if w != 0.0 {
                out += (self.blocks[t].as_dmatrix().column(k) * (s_k - lo)
                    + self.offsets[t].column(k))
                    * w;
            }
        }
        out
    }

    fn jacobian_column(&self, k: usize, s_k: f64) -> Result<DVector<f64>> {
        if self.eps == 0.0 {
            let interior_knot = self
                .knots()
                .into_iter()
                .any(|knot| knot > 0.0 && knot < 1.0 && (s_k - knot).abs() <= KNOT_TOL);
            if interior_knot {
                return Err(Error::OnKnot {
                    coord: k,
                    value: s_k,
                });
            }
            return Ok(self.blocks[self.cell_of(s_k)].column(k));
        }
        let mut col = DVector::zeros(self.observed_dim());
        for t in 0..self.blocks.len() {
            let lo = t as f64 * self.delta;
            let hi = lo + self.delta;
            let w = step(s_k - lo, self.eps) - step(s_k - hi, self.eps);
            let dw = step_derivative(s_k - lo, self.eps) - step_derivative(s_k - hi, self.eps);
            if w != 0.0 {
                col += self.blocks[t].as_dmatrix().column(k) * w;
            }
            if dw != 0.0 {
                col += (self.blocks[t].as_dmatrix().column(k) * (s_k - lo)
                    + self.offsets[t].column(k))
                    * dw;
            }
        }
        Ok(col)
    }

    /// Writes every block as `block,row,col,value` rows.
    pub fn write_blocks_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["block", "row", "col", "value"])?;
        for (t, b) in self.blocks.iter().enumerate() {
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    w.write_record(&[
                        t.to_string(),
                        r.to_string(),
                        c.to_string(),
                        b.get(r, c).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl MixingMap for SmoothGridMap {
    fn latent_dim(&self) -> usize {
        SmoothGridMap::latent_dim(self)
    }

    fn observed_dim(&self) -> usize {
        SmoothGridMap::observed_dim(self)
    }

    fn domain(&self) -> Domain {
        Domain::UnitCube
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        let mut x = DVector::zeros(self.observed_dim());
        for (k, &v) in s.iter().enumerate() {
            x += self.coordinate_function(k, v);
        }
        Ok(x)
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        let mut j = DMatrix::zeros(self.observed_dim(), self.latent_dim());
        for (k, &v) in s.iter().enumerate() {
            j.set_column(k, &self.jacobian_column(k, v)?);
        }
        DenseMatrix::new(j)
    }
}

/// Samples `p` blocks with i.i.d. spherically symmetric columns; block `t`
/// uses the sub-seed `mix(seed, t)`.
pub fn sample_grid_map(
    d: usize,
    m: usize,
    delta: f64,
    sampler: &SphericalSampler,
    eps: f64,
    seed: u64,
) -> Result<SmoothGridMap> {
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
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let blocks = (0..block_count(delta))
        .map(|t| {
            let mut rng = rng_from_seed(mix_seed(seed, t as u64));
            sampler.sample_columns(&mut rng, d)
        })
        .collect();
    SmoothGridMap::from_blocks(delta, eps, blocks)
}
