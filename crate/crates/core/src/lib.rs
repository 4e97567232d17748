//! Adaptive stochastic optimization laboratory.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense vectors, a seeded splitmix64 generator and a
//!   finite-difference gradient oracle.
//! - [`problems`]: analytic test functions, finite-sum robust regression and
//!   LibSVM ingestion.
//! - [`oracles`]: stochastic gradient sources for each noise model.
//! - [`optimizers`]: step-driven optimizers, step-size schedules and projections.
//! - [`diagnostics`]: smoothness probes, PL audits, scale-freeness audits and
//!   update histograms.
//! - [`harness`]: declarative experiments, grid search, CSV/SVG output and the
//!   command-line front end.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The harness
//! works in `f64`; the aliases below name the common instantiations.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod optimizers;
pub mod oracles;
pub mod problems;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision vector, the harness default.
pub type Vec64 = numerics::Vector<f64>;
/// Single-precision vector.
pub type Vec32 = numerics::Vector<f32>;
/// Double-precision problem trait object.
pub type DynProblem64 = dyn problems::Problem<f64>;
/// Double-precision optimizer trait object.
pub type DynOptimizer64 = dyn optimizers::Optimizer<f64>;
/// Double-precision dataset.
pub type Dataset64 = problems::Dataset<f64>;
