//! Stochastic horizontal-gene-transfer population model: exact event
//! simulation at finite carrying capacity `K`, the piecewise-affine limit of
//! the log-scale exponents as `K → ∞`, closed-form outcome criteria, and
//! branching-process oracles used to validate them.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpi;
pub mod io;
pub mod limit;
pub mod model;
pub mod outcome;
pub mod rng;
pub mod ssa;

pub use limit::{EngineOptions, LimitTrajectory};
pub use model::ModelParams;
