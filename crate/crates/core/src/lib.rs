//! Jacobian-orthogonality (IMA) contrasts for mixing functions with
//! rectangular Jacobians, the map families and spurious solutions they are
//! tested on, and the Monte Carlo experiments built from them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contrast;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mixing;
pub mod mpa;
pub mod seeding;
pub mod stats;
