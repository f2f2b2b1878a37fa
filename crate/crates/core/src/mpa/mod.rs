//! Spurious-solution constructors: the rotated-Gaussian measure-preserving
//! automorphism, the two-dimensional Darmois construction, and composition.

mod compose;
mod darmois;
mod rotated;

pub use compose::{compose_spurious, spurious_darmois, spurious_mpa, ComposedMap};
pub use darmois::{
    darmois_build, darmois_jacobian, gaussian_conditional_cdf, gaussian_conditional_cdf_dx1,
    DarmoisInverse, DarmoisMap, DensitySpec, DEFAULT_RESOLUTION, MIN_RESOLUTION,
};
pub use rotated::{mpa_forward, mpa_jacobian, MpaEval, RotatedGaussianMPA};
