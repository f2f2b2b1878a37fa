//! Dense matrix newtype and the small amount of linear algebra the rest of
//! the crate needs (singular values, orthonormal factors, rank checks).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a matrix is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Real matrix with finite entries. Used for Jacobians, mixing matrices and
/// rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a `rows × cols` matrix from entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n_rows, n_cols, &flat)
    }

    /// Wraps an nalgebra matrix, rejecting non-finite entries.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.0[(r, c)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn column(&self, c: usize) -> DVector<f64> {
        self.0.column(c).into_owned()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| self.0[(r, c)]).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: rhs.rows(),
            });
        }
        DenseMatrix::new(&self.0 * &rhs.0)
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.0.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Ratio of smallest to largest singular value (0 for the zero matrix).
    pub fn singular_ratio(&self) -> f64 {
        let sv = self.singular_values();
        let max = sv[0];
        let min = *sv.last().unwrap();
        if max > 0.0 {
            min / max
        } else {
            0.0
        }
    }

    /// Numerical column rank with the relative threshold `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let sv = self.singular_values();
        let max = sv[0];
        sv.iter().filter(|&&s| s > tol * max).count()
    }

    /// Errors with `RankDeficient` unless the matrix has full column rank at `tol`.
    pub fn check_full_column_rank(&self, tol: f64) -> Result<()> {
        if self.rows() < self.cols() {
            return Err(Error::RankDeficient { ratio: 0.0, tol });
        }
        let ratio = self.singular_ratio();
        if ratio > tol {
            Ok(())
        } else {
            Err(Error::RankDeficient { ratio, tol })
        }
    }

    /// Largest absolute entry of `AᵀA − I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.0.transpose() * &self.0;
        let n = g.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        DenseMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Haar-distributed `n × k` matrix with orthonormal columns (QR of a Gaussian
/// matrix with the sign of `R`'s diagonal folded into `Q`).
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DenseMatrix {
    assert!(k <= n && k > 0);
    let g = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..k {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    DenseMatrix(q.columns(0, k).into_owned())
}

/// 2 × 2 rotation by `angle` radians.
pub fn rotation_2d(angle: f64) -> DenseMatrix {
    let (s, c) = angle.sin_cos();
    DenseMatrix(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
}

/// Permutation matrix `P` with `P e_j = e_{perm[j]}`.
pub fn permutation_matrix(perm: &[usize]) -> Result<DenseMatrix> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::domain(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let mut m = DMatrix::zeros(n, n);
    for (j, &p) in perm.iter().enumerate() {
        m[(p, j)] = 1.0;
    }
    DenseMatrix::new(m)
}

/// True when every column of the square matrix `m` is `±e_i` to within `tol`.
pub fn is_signed_permutation(m: &DenseMatrix, tol: f64) -> bool {
    if m.rows() != m.cols() {
        return false;
    }
    (0..m.cols()).all(|c| column_is_signed_axis(m, c, tol))
}

/// True when column `c` of `m` is `±e_i` for some `i`.
pub fn column_is_signed_axis(m: &DenseMatrix, c: usize, tol: f64) -> bool {
    let big = (0..m.rows())
        .filter(|&r| (m.get(r, c).abs() - 1.0).abs() <= tol)
        .count();
    let small = (0..m.rows()).filter(|&r| m.get(r, c).abs() <= tol).count();
    big == 1 && small == m.rows() - 1
}
