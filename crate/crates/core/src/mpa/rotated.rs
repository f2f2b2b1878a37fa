use nalgebra::{DMatrix, DVector};

use crate::distributions::{std_normal_pdf, FactorialDistribution};
use crate::error::{Error, Result};
use crate::linalg::{column_is_signed_axis, is_signed_permutation, DenseMatrix};
use crate::mixing::MixingMap;

const ROTATION_TOL: f64 = 1e-12;
const AXIS_TOL: f64 = 1e-12;

/// Rotated-Gaussian measure-preserving automorphism
/// `a(s) = F⁻¹(Φ(R Φ⁻¹(F(s))))`, with `F` the component-wise source CDFs.
#[derive(Debug, Clone)]
pub struct RotatedGaussianMPA {
    source: FactorialDistribution,
    rotation: DenseMatrix,
}

/// Output of the forward map together with the number of CDF clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct MpaEval {
    pub value: DVector<f64>,
    pub clamps: u64,
}

impl RotatedGaussianMPA {
    pub fn new(source: FactorialDistribution, rotation: DenseMatrix) -> Result<Self> {
        let d = source.dim();
        if rotation.rows() != d || rotation.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rotation.rows(),
            });
        }
        let defect = rotation.orthonormality_defect();
        if defect > ROTATION_TOL {
            return Err(Error::domain(format!(
                "rotation has RᵀR − I defect {defect:e}"
            )));
        }
        Ok(Self { source, rotation })
    }

    pub fn source(&self) -> &FactorialDistribution {
        &self.source
    }

    pub fn rotation(&self) -> &DenseMatrix {
        &self.rotation
    }

    /// Errors with `TrivialRotation` when the rotation only permutes or flips
    /// axes, or when it sends every non-Gaussian component to an axis.
    /// Rotations of purely Gaussian sources are accepted.
    pub fn check_nontrivial(&self) -> Result<()> {
        if is_signed_permutation(&self.rotation, AXIS_TOL) {
            return Err(Error::TrivialRotation);
        }
        let non_gaussian: Vec<usize> = (0..self.source.dim())
            .filter(|&i| !self.source.component(i).is_gaussian())
            .collect();
        if !non_gaussian.is_empty()
            && non_gaussian
                .iter()
                .all(|&i| column_is_signed_axis(&self.rotation, i, AXIS_TOL))
        {
            return Err(Error::TrivialRotation);
        }
        Ok(())
    }

    fn scores(&self, s: &[f64]) -> Result<(Vec<f64>, u64)> {
        let mut clamps = 0;
        let mut z = Vec::with_capacity(s.len());
        for (i, &x) in s.iter().enumerate() {
            let law = self.source.component(i);
            if !law.in_open_support(x) {
                return Err(Error::Support {
                    component: i,
                    value: x,
                });
            }
            let (zi, c) = law.normal_score(x);
            clamps += c as u64;
            z.push(zi);
        }
        Ok((z, clamps))
    }

    fn check_dim(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                got: s.len(),
            });
        }
        Ok(())
    }

    /// `a(s)` with the clamp count.
    pub fn forward(&self, s: &[f64]) -> Result<MpaEval> {
        self.check_dim(s)?;
        let (z, mut clamps) = self.scores(s)?;
        let zr = self.rotation.as_dmatrix() * DVector::from_vec(z);
        let mut y = DVector::zeros(s.len());
        for (i, &zi) in zr.iter().enumerate() {
            let (yi, c) = self.source.component(i).from_normal_score(zi)?;
            clamps += c as u64;
            y[i] = yi;
        }
        Ok(MpaEval { value: y, clamps })
    }

    /// `D_out R D_in` with `D_in = diag(p(s)/φ(z))`, `D_out = diag(φ(z′)/p(y))`.
    pub fn jacobian_with_clamps(&self, s: &[f64]) -> Result<(DenseMatrix, u64)> {
        self.check_dim(s)?;
        let (z, mut clamps) = self.scores(s)?;
        let d = s.len();
        let d_in: Vec<f64> = (0..d)
            .map(|i| self.source.component(i).pdf(s[i]) / std_normal_pdf(z[i]))
            .collect();
        let zr = self.rotation.as_dmatrix() * DVector::from_vec(z);
        let mut d_out = Vec::with_capacity(d);
        for (i, &zi) in zr.iter().enumerate() {
            let law = self.source.component(i);
            let (yi, c) = law.from_normal_score(zi)?;
            clamps += c as u64;
            let p = law.pdf(yi);
            if !(p > 0.0) {
                return Err(Error::Support {
                    component: i,
                    value: yi,
                });
            }
            d_out.push(std_normal_pdf(zi) / p);
        }
        let j = DMatrix::from_diagonal(&DVector::from_vec(d_out))
            * self.rotation.as_dmatrix()
            * DMatrix::from_diagonal(&DVector::from_vec(d_in));
        Ok((DenseMatrix::new(j)?, clamps))
    }
}

/// `a(s)`.
pub fn mpa_forward(a: &RotatedGaussianMPA, s: &[f64]) -> Result<DVector<f64>> {
    a.forward(s).map(|e| e.value)
}

/// Analytic Jacobian of `a` at `s`.
pub fn mpa_jacobian(a: &RotatedGaussianMPA, s: &[f64]) -> Result<DenseMatrix> {
    a.jacobian_with_clamps(s).map(|(j, _)| j)
}

impl MixingMap for RotatedGaussianMPA {
    fn latent_dim(&self) -> usize {
        self.source.dim()
    }

    fn observed_dim(&self) -> usize {
        self.source.dim()
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        mpa_forward(self, s)
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        mpa_jacobian(self, s)
    }

    fn jacobian_tracked(&self, s: &[f64], clamps: &mut u64) -> Result<DenseMatrix> {
        let (j, c) = self.jacobian_with_clamps(s)?;
        *clamps += c;
        Ok(j)
    }
}
