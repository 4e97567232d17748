//! Deterministic primitives: dense vectors, a seeded generator and a
//! central-difference gradient oracle.

mod fd;
mod rng;
mod vector;

pub use fd::{finite_diff_grad, finite_diff_grad_fn, relative_step};
pub use rng::Rng;
pub use vector::{dot, norms, Norms, Vector};
