//! Conformal maps: Möbius-type primitives in `R^d` followed by an
//! orthonormal embedding into `R^m`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::MixingMap;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// One conformal step `R^d → R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConformalPrimitive {
    /// `s ↦ scale·O·s + shift`.
    Similarity {
        scale: f64,
        rotation: DenseMatrix,
        shift: Vec<f64>,
    },
    /// `s ↦ c + (s − c)/‖s − c‖²`.
    Inversion { center: Vec<f64> },
}

impl ConformalPrimitive {
    pub fn similarity(scale: f64, rotation: DenseMatrix, shift: Vec<f64>) -> Result<Self> {
        let p = ConformalPrimitive::Similarity {
            scale,
            rotation,
            shift,
        };
        p.validate(p.dim())?;
        Ok(p)
    }

    pub fn inversion(center: Vec<f64>) -> Self {
        ConformalPrimitive::Inversion { center }
    }

    fn dim(&self) -> usize {
        match self {
            ConformalPrimitive::Similarity { rotation, .. } => rotation.cols(),
            ConformalPrimitive::Inversion { center } => center.len(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            ConformalPrimitive::Similarity {
                scale,
                rotation,
                shift,
            } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::domain(format!(
                        "similarity scale must be positive, got {scale}"
                    )));
                }
                if rotation.rows() != d || rotation.cols() != d || shift.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: rotation.rows().max(shift.len()),
                    });
                }
                if rotation.orthonormality_defect() > ORTHONORMAL_TOL {
                    return Err(Error::domain("similarity rotation is not orthogonal"));
                }
                if shift.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("similarity shift must be finite"));
                }
            }
            ConformalPrimitive::Inversion { center } => {
                if center.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: center.len(),
                    });
                }
                if center.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("inversion centre must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Image, Jacobian and conformal factor at `s`.
    fn apply(&self, s: &DVector<f64>, exclusion: f64) -> Result<(DVector<f64>, DMatrix<f64>, f64)> {
        match self {
            ConformalPrimitive::Similarity {
                scale,
                rotation,
                shift,
            } => {
                let j = rotation.as_dmatrix() * *scale;
                let y = &j * s + DVector::from_column_slice(shift);
                Ok((y, j, *scale))
            }
            ConformalPrimitive::Inversion { center } => {
                let c = DVector::from_column_slice(center);
                let v = s - &c;
                let r2 = v.norm_squared();
                if r2.sqrt() <= exclusion {
                    return Err(Error::NearPole { radius: exclusion });
                }
                let y = &c + &v / r2;
                let n = s.len();
                let j = (DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / r2)) / r2;
                Ok((y, j, 1.0 / r2))
            }
        }
    }
}

/// `embed ∘ p_n ∘ … ∘ p_1`, where `embed` has orthonormal columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalMap {
    embed: DenseMatrix,
    primitives: Vec<ConformalPrimitive>,
    exclusion_radius: f64,
}

impl ConformalMap {
    /// Primitives are applied in list order before the embedding.
    pub fn new(
        embed: DenseMatrix,
        primitives: Vec<ConformalPrimitive>,
        exclusion_radius: f64,
    ) -> Result<Self> {
        if embed.rows() < embed.cols() {
            return Err(Error::domain("embedding needs m ≥ d"));
        }
        if embed.orthonormality_defect() > ORTHONORMAL_TOL {
            return Err(Error::domain("embedding columns are not orthonormal"));
        }
        if !(exclusion_radius > 0.0) || !exclusion_radius.is_finite() {
            return Err(Error::domain(format!(
                "exclusion radius must be positive, got {exclusion_radius}"
            )));
        }
        for p in &primitives {
            p.validate(embed.cols())?;
        }
        Ok(Self {
            embed,
            primitives,
            exclusion_radius,
        })
    }

    pub fn embed(&self) -> &DenseMatrix {
        &self.embed
    }

    pub fn primitives(&self) -> &[ConformalPrimitive] {
        &self.primitives
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    fn forward(&self, s: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>, f64)> {
        let d = self.embed.cols();
        let mut y = DVector::from_column_slice(s);
        let mut j = DMatrix::identity(d, d);
        let mut lambda = 1.0;
        for p in &self.primitives {
            let (ny, pj, f) = p.apply(&y, self.exclusion_radius)?;
            y = ny;
            j = pj * j;
            lambda *= f;
        }
        Ok((
            self.embed.as_dmatrix() * y,
            self.embed.as_dmatrix() * j,
            lambda,
        ))
    }

    /// Product of the primitives' conformal factors, `λ(s)`.
    pub fn conformal_factor(&self, s: &[f64]) -> Result<f64> {
        super::check_point(self.embed.cols(), &super::Domain::Whole, s)?;
        Ok(self.forward(s)?.2)
    }
}

impl MixingMap for ConformalMap {
    fn latent_dim(&self) -> usize {
        self.embed.cols()
    }

    fn observed_dim(&self) -> usize {
        self.embed.rows()
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        Ok(self.forward(s)?.0)
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        DenseMatrix::new(self.forward(s)?.1)
    }
}

/// `max |JᵀJ/λ̄² − I|` with `λ̄² = tr(JᵀJ)/d`.
pub fn conformality_defect(map: &ConformalMap, s: &[f64]) -> Result<f64> {
    let j = map.jacobian(s)?;
    let g = j.as_dmatrix().transpose() * j.as_dmatrix();
    let d = g.nrows();
    let lambda2 = g.trace() / d as f64;
    let defect = (g / lambda2 - DMatrix::<f64>::identity(d, d)).abs().max();
    Ok(defect)
}
