//! Mixing-function families `f: R^d → R^m` with analytic Jacobians.
//!
//! Every family implements [`MixingMap`]. Callers normally go through
//! [`eval_mixing`], [`jacobian_analytic`] and [`jacobian_fd`], which check
//! dimensions and the declared domain before evaluating.

mod conformal;
mod descriptor;
mod elementwise;
mod grid;
mod linear;
mod probe;
mod two_piece;

pub use conformal::{conformality_defect, ConformalMap, ConformalPrimitive};
pub use descriptor::MapDescriptor;
pub use elementwise::{ElementwiseMap, MonotoneTransform};
pub use grid::{sample_grid_map, smooth_step, smooth_step_derivative, SmoothGridMap};
pub use linear::LinearMap;
pub use probe::{injectivity_probe, ProbeReport, VIOLATION_DISTANCE};
pub use two_piece::{make_two_piece, TwoPieceMap};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Slack accepted on the faces of the unit cube, so that round trips such as
/// `cbrt(x³)` do not push boundary points outside.
pub const CUBE_SLACK: f64 = 1e-12;

/// Declared domain of a map.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Whole,
    /// `[0, 1]^d`.
    UnitCube,
    /// `(0, 1)^d`.
    OpenUnitCube,
    /// Closed box, one `(lo, hi)` pair per coordinate.
    Box(Vec<(f64, f64)>),
}

impl Domain {
    pub fn contains(&self, s: &[f64]) -> bool {
        match self {
            Domain::Whole => true,
            Domain::UnitCube => s
                .iter()
                .all(|&x| (-CUBE_SLACK..=1.0 + CUBE_SLACK).contains(&x)),
            Domain::OpenUnitCube => s.iter().all(|&x| x > 0.0 && x < 1.0),
            Domain::Box(b) => s.iter().zip(b).all(|(&x, &(lo, hi))| x >= lo && x <= hi),
        }
    }

    /// Bounding box, when the domain is bounded.
    pub fn bounding_box(&self, d: usize) -> Option<Vec<(f64, f64)>> {
        match self {
            Domain::Whole => None,
            Domain::UnitCube | Domain::OpenUnitCube => Some(vec![(0.0, 1.0); d]),
            Domain::Box(b) if b.iter().all(|(lo, hi)| lo.is_finite() && hi.is_finite()) => {
                Some(b.clone())
            }
            Domain::Box(_) => None,
        }
    }
}

/// An evaluable map `s ↦ x` with an analytic Jacobian.
pub trait MixingMap: Send + Sync + std::fmt::Debug {
    fn latent_dim(&self) -> usize;

    fn observed_dim(&self) -> usize;

    fn domain(&self) -> Domain {
        Domain::Whole
    }

    /// Evaluates at a point already known to be in the domain.
    fn eval_in_domain(&self, s: &[f64]) -> Result<DVector<f64>>;

    /// Jacobian (`m × d`) at a point already known to be in the domain.
    fn jacobian_in_domain(&self, s: &[f64]) -> Result<DenseMatrix>;

    /// Jacobian that also adds CDF-clamp events to `clamps`. Maps without
    /// clamping keep the default.
    fn jacobian_tracked(&self, s: &[f64], clamps: &mut u64) -> Result<DenseMatrix> {
        let _ = clamps;
        self.jacobian(s)
    }

    fn eval(&self, s: &[f64]) -> Result<DVector<f64>> {
        check_point(self.latent_dim(), &self.domain(), s)?;
        self.eval_in_domain(s)
    }

    fn jacobian(&self, s: &[f64]) -> Result<DenseMatrix> {
        check_point(self.latent_dim(), &self.domain(), s)?;
        self.jacobian_in_domain(s)
    }
}

pub(crate) fn check_point(d: usize, domain: &Domain, s: &[f64]) -> Result<()> {
    if s.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s.len(),
        });
    }
    if s.iter().any(|x| !x.is_finite()) || !domain.contains(s) {
        return Err(Error::OutOfDomain { point: s.to_vec() });
    }
    Ok(())
}

/// `f(s)`, with dimension and domain checks.
pub fn eval_mixing(map: &dyn MixingMap, s: &[f64]) -> Result<DVector<f64>> {
    map.eval(s)
}

/// Exact chain-rule Jacobian of `map` at `s`.
pub fn jacobian_analytic(map: &dyn MixingMap, s: &[f64]) -> Result<DenseMatrix> {
    map.jacobian(s)
}

/// Central-difference Jacobian, `(f(s + h e_k) − f(s − h e_k)) / 2h` per column.
pub fn jacobian_fd(map: &dyn MixingMap, s: &[f64], h: f64) -> Result<DenseMatrix> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("step h must be positive, got {h}")));
    }
    check_point(map.latent_dim(), &map.domain(), s)?;
    let d = map.latent_dim();
    let m = map.observed_dim();
    let mut j = nalgebra::DMatrix::zeros(m, d);
    let mut probe = s.to_vec();
    for k in 0..d {
        probe[k] = s[k] + h;
        let plus = map.eval(&probe)?;
        probe[k] = s[k] - h;
        let minus = map.eval(&probe)?;
        probe[k] = s[k];
        j.set_column(k, &((plus - minus) / (2.0 * h)));
    }
    DenseMatrix::new(j)
}
