use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Domain, MixingMap};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Strictly increasing scalar transform with a closed-form inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MonotoneTransform {
    Identity,
    /// `scale·x + shift`; a negative scale is allowed (strictly decreasing).
    Affine {
        scale: f64,
        shift: f64,
    },
    Cube,
    Cbrt,
    Tanh,
    Atanh,
}

impl MonotoneTransform {
    pub fn validate(&self) -> Result<()> {
        if let MonotoneTransform::Affine { scale, shift } = self {
            if *scale == 0.0 || !scale.is_finite() || !shift.is_finite() {
                return Err(Error::NonMonotone(format!(
                    "affine transform with scale {scale} and shift {shift}"
                )));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> MonotoneTransform {
        match *self {
            MonotoneTransform::Identity => MonotoneTransform::Identity,
            MonotoneTransform::Affine { scale, shift } => MonotoneTransform::Affine {
                scale: 1.0 / scale,
                shift: -shift / scale,
            },
            MonotoneTransform::Cube => MonotoneTransform::Cbrt,
            MonotoneTransform::Cbrt => MonotoneTransform::Cube,
            MonotoneTransform::Tanh => MonotoneTransform::Atanh,
            MonotoneTransform::Atanh => MonotoneTransform::Tanh,
        }
    }

    /// Open interval on which the transform is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            MonotoneTransform::Atanh => (-1.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            MonotoneTransform::Identity => x,
            MonotoneTransform::Affine { scale, shift } => scale * x + shift,
            MonotoneTransform::Cube => x * x * x,
            MonotoneTransform::Cbrt => x.cbrt(),
            MonotoneTransform::Tanh => x.tanh(),
            MonotoneTransform::Atanh => x.atanh(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            MonotoneTransform::Identity => 1.0,
            MonotoneTransform::Affine { scale, .. } => scale,
            MonotoneTransform::Cube => 3.0 * x * x,
            MonotoneTransform::Cbrt => 1.0 / (3.0 * x.cbrt().powi(2)),
            MonotoneTransform::Tanh => 1.0 - x.tanh().powi(2),
            MonotoneTransform::Atanh => 1.0 / (1.0 - x * x),
        }
    }
}

/// `h(s) = (h_1(s_1), …, h_d(s_d))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementwiseMap {
    transforms: Vec<MonotoneTransform>,
}

impl ElementwiseMap {
    pub fn new(transforms: Vec<MonotoneTransform>) -> Result<Self> {
        if transforms.is_empty() {
            return Err(Error::domain(
                "element-wise map needs at least one component",
            ));
        }
        for t in &transforms {
            t.validate()?;
        }
        Ok(Self { transforms })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            transforms: vec![MonotoneTransform::Identity; d],
        }
    }

    pub fn transforms(&self) -> &[MonotoneTransform] {
        &self.transforms
    }

    pub fn inverse(&self) -> Self {
        Self {
            transforms: self.transforms.iter().map(|t| t.inverse()).collect(),
        }
    }

    /// True when every component is the identity.
    pub fn is_identity(&self) -> bool {
        self.transforms
            .iter()
            .all(|t| *t == MonotoneTransform::Identity)
    }
}

impl MixingMap for ElementwiseMap {
    fn latent_dim(&self) -> usize {
        self.transforms.len()
    }

    fn observed_dim(&self) -> usize {
        self.transforms.len()
    }

    fn domain(&self) -> Domain {
        if self.transforms.contains(&MonotoneTransform::Atanh) {
            // Box is closed; the open ends are rejected in eval below.
            Domain::Box(self.transforms.iter().map(|t| t.domain()).collect())
        } else {
            Domain::Whole
        }
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        let out: Vec<f64> = self
            .transforms
            .iter()
            .zip(s)
            .map(|(t, &x)| t.apply(x))
            .collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain { point: s.to_vec() });
        }
        Ok(DVector::from_vec(out))
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        let diag: Vec<f64> = self
            .transforms
            .iter()
            .zip(s)
            .map(|(t, &x)| t.derivative(x))
            .collect();
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain { point: s.to_vec() });
        }
        DenseMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(diag)))
    }
}
