use nalgebra::DVector;

use super::{Domain, MixingMap};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Affine map `s ↦ A s + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DenseMatrix,
    offset: Option<DVector<f64>>,
    domain: Domain,
}

impl LinearMap {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        Ok(Self {
            matrix,
            offset: None,
            domain: Domain::Whole,
        })
    }

    pub fn with_offset(mut self, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != self.matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.rows(),
                got: offset.len(),
            });
        }
        self.offset = Some(DVector::from_vec(offset));
        Ok(self)
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl MixingMap for LinearMap {
    fn latent_dim(&self) -> usize {
        self.matrix.cols()
    }

    fn observed_dim(&self) -> usize {
        self.matrix.rows()
    }

    fn domain(&self) -> Domain {
        self.domain.clone()
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        let x = self.matrix.as_dmatrix() * DVector::from_column_slice(s);
        Ok(match &self.offset {
            Some(b) => x + b,
            None => x,
        })
    }

    fn jacobian_in_domain(&self, _s: &[f64]) -> Result<DenseMatrix> {
        Ok(self.matrix.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::{eval_mixing, jacobian_analytic, jacobian_fd};

    #[test]
    fn linear_map_basics() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0], vec![3.0, -1.0]]).unwrap();
        let map = LinearMap::new(a.clone()).unwrap();
        assert_eq!(eval_mixing(&map, &[0.0, 0.0]).unwrap().norm(), 0.0);
        assert_eq!(jacobian_analytic(&map, &[4.0, -2.0]).unwrap(), a);
        let fd = jacobian_fd(&map, &[0.3, 0.7], 1e-3).unwrap();
        let diff = (fd.as_dmatrix() - a.as_dmatrix()).abs().max();
        assert!(diff < 1e-10);
    }

    #[test]
    fn offset_is_added() {
        let map = LinearMap::new(DenseMatrix::identity(2))
            .unwrap()
            .with_offset(vec![1.0, -1.0])
            .unwrap();
        let x = eval_mixing(&map, &[2.0, 3.0]).unwrap();
        assert_eq!(x.as_slice(), &[3.0, 2.0]);
        assert!(LinearMap::new(DenseMatrix::identity(2))
            .unwrap()
            .with_offset(vec![1.0])
            .is_err());
    }
}
