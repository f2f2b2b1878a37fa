use std::sync::Arc;

use nalgebra::DVector;

use super::{DarmoisInverse, DarmoisMap, RotatedGaussianMPA};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mixing::{Domain, LinearMap, MixingMap};

/// Stages applied in order: `stages[0]` first.
#[derive(Debug, Clone)]
pub struct ComposedMap {
    stages: Vec<Arc<dyn MixingMap>>,
}

impl ComposedMap {
    pub fn new(stages: Vec<Arc<dyn MixingMap>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::domain("composition needs at least one stage"));
        }
        for w in stages.windows(2) {
            if w[0].observed_dim() != w[1].latent_dim() {
                return Err(Error::DimensionMismatch {
                    expected: w[1].latent_dim(),
                    got: w[0].observed_dim(),
                });
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Arc<dyn MixingMap>] {
        &self.stages
    }
}

impl MixingMap for ComposedMap {
    fn latent_dim(&self) -> usize {
        self.stages[0].latent_dim()
    }

    fn observed_dim(&self) -> usize {
        self.stages[self.stages.len() - 1].observed_dim()
    }

    fn domain(&self) -> Domain {
        self.stages[0].domain()
    }

    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>> {
        let mut x = self.stages[0].eval_in_domain(s)?;
        for st in &self.stages[1..] {
            x = st.eval(x.as_slice())?;
        }
        Ok(x)
    }

    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix> {
        let mut clamps = 0;
        self.jacobian_tracked(s, &mut clamps)
    }

    fn jacobian_tracked(&self, s: &[f64], clamps: &mut u64) -> Result<DenseMatrix> {
        let mut x = DVector::from_column_slice(s);
        let mut j: Option<nalgebra::DMatrix<f64>> = None;
        for st in &self.stages {
            let sj = st.jacobian_tracked(x.as_slice(), clamps)?;
            j = Some(match j {
                None => sj.as_dmatrix().clone(),
                Some(prev) => sj.as_dmatrix() * prev,
            });
            x = st.eval(x.as_slice())?;
        }
        DenseMatrix::new(j.expect("at least one stage"))
    }
}

/// Chain of stages, first applied first.
pub fn compose_spurious(stages: Vec<Arc<dyn MixingMap>>) -> Result<ComposedMap> {
    ComposedMap::new(stages)
}

/// `f ∘ a`.
pub fn spurious_mpa(f: Arc<dyn MixingMap>, a: Arc<RotatedGaussianMPA>) -> Result<ComposedMap> {
    ComposedMap::new(vec![a, f])
}

/// `f ∘ Oᵀ ∘ g⁻¹`, where `g` is the Darmois map of `x̃ = O s`.
pub fn spurious_darmois(
    f: Arc<dyn MixingMap>,
    o: &DenseMatrix,
    dm: Arc<DarmoisMap>,
) -> Result<ComposedMap> {
    let ot = Arc::new(LinearMap::new(o.transpose())?);
    ComposedMap::new(vec![Arc::new(DarmoisInverse::new(dm)), ot, f])
}
