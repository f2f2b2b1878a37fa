//! Two affine pieces glued along the axis-aligned hyperplane `{s_k = c}`.

use nalgebra::{DMatrix, DVector};

use super::grid::{step, step_derivative};
use super::MixingMap;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RANK_TOL};

/// `J0 s` for `s_k ≤ c`, `J1 s + c1` beyond, optionally blended over `(c − ε, c + ε]`.
#[derive(Debug, Clone)]
pub struct TwoPieceMap {
    j0: DenseMatrix,
    j1: DenseMatrix,
    k: usize,
    c: f64,
    c1: DVector<f64>,
    eps: f64,
    linear: bool,
}

/// Replaces column `k` of `j0` by `new_col` beyond `s_k = c`.
///
/// `new_col` equal to column `k` gives a single affine map flagged
/// [`TwoPieceMap::is_linear`]; otherwise `new_col` must be linearly
/// independent of the columns of `j0`.
pub fn make_two_piece(
    j0: DenseMatrix,
    k: usize,
    new_col: Vec<f64>,
    c: f64,
    eps: f64,
) -> Result<TwoPieceMap> {
    let (m, d) = (j0.rows(), j0.cols());
    if k >= d {
        return Err(Error::domain(format!(
            "column index {k} out of range for d = {d}"
        )));
    }
    if new_col.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: new_col.len(),
        });
    }
    if !c.is_finite() {
        return Err(Error::domain("threshold c must be finite"));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    j0.check_full_column_rank(RANK_TOL)?;

    let old = j0.column(k);
    let new = DVector::from_vec(new_col);
    let linear = old == new;

    let mut j1 = j0.as_dmatrix().clone();
    j1.set_column(k, &new);
    let j1 = DenseMatrix::new(j1)?;
    if !linear {
        if m > d {
            let mut ext = DMatrix::zeros(m, d + 1);
            ext.columns_mut(0, d).copy_from(j0.as_dmatrix());
            ext.set_column(d, &new);
            DenseMatrix::new(ext)?.check_full_column_rank(RANK_TOL)?;
        } else {
            j1.check_full_column_rank(RANK_TOL)?;
        }
    }

    let c1 = (&old - &new) * c;
    let map = TwoPieceMap {
        j0,
        j1,
        k,
        c,
        c1,
        eps,
        linear,
    };
    map.check_boundary_continuity()?;
    Ok(map)
}

impl TwoPieceMap {
    fn check_boundary_continuity(&self) -> Result<()> {
        let mut s = vec![1.0; self.j0.cols()];
        s[self.k] = self.c;
        let v = DVector::from_vec(s);
        let left = self.j0.as_dmatrix() * &v;
        let right = self.j1.as_dmatrix() * &v + &self.c1;
        let gap = (&left - right).abs().max();
        if gap > 1e-12 * left.abs().max().max(1.0) {
            return Err(Error::domain(format!(
                "pieces disagree by {gap:e} on the boundary"
            )));
        }
        Ok(())
    }

    pub fn j0(&self) -> &DenseMatrix {
        &self.j0
    }

    pub fn j1(&self) -> &DenseMatrix {
        &self.j1
    }

    pub fn column_index(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> f64 {
        self.c
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.c1
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Both pieces coincide.
    pub fn is_linear(&self) -> bool {
        self.linear
    }

    /// Column rank of `J0 − J1`: 0 for the linear mode, 1 otherwise.
    pub fn difference_rank(&self) -> usize {
        let diff = self.j0.as_dmatrix() - self.j1.as_dmatrix();
        if diff.abs().max() == 0.0 {
            0
        } else {
            DenseMatrix::new(diff)
                .map(|m| m.rank(RANK_TOL))
                .unwrap_or(0)
        }
    }
}

impl MixingMap for TwoPieceMap {
    fn latent_dim(&self) -> usize {
        self.j0.cols()
    }

    fn observed_dim(&self) -> usize {
        self.j0.rows()
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        let v = DVector::from_column_slice(s);
        let sk = s[self.k];
        if self.eps == 0.0 {
            return Ok(if sk <= self.c {
                self.j0.as_dmatrix() * v
            } else {
                self.j1.as_dmatrix() * v + &self.c1
            });
        }
        // Columns other than k are shared, so only coordinate k is blended.
        let mut rest = v.clone();
        rest[self.k] = 0.0;
        let base = self.j0.as_dmatrix() * rest;
        let a = self.j0.column(self.k);
        let b = self.j1.column(self.k);
        let left = &a * (sk * step(self.c - sk, self.eps));
        let right = (b * (sk - self.c) + a * self.c) * step(sk - self.c, self.eps);
        Ok(base + left + right)
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        let sk = s[self.k];
        if self.eps == 0.0 {
            if sk == self.c && !self.linear {
                return Err(Error::OnKnot {
                    coord: self.k,
                    value: sk,
                });
            }
            return Ok(if sk <= self.c {
                self.j0.clone()
            } else {
                self.j1.clone()
            });
        }
        let a = self.j0.column(self.k);
        let b = self.j1.column(self.k);
        let u = sk - self.c;
        let col = &a * step(-u, self.eps)
            + &b * step(u, self.eps)
            + (b - a) * (u * step_derivative(u, self.eps));
        let mut j = self.j0.as_dmatrix().clone();
        j.set_column(self.k, &col);
        DenseMatrix::new(j)
    }
}
