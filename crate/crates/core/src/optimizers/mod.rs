//! Step-driven optimizers, step-size schedules and projections.
//!
//! Every optimizer implements [`Optimizer`]: the caller draws
//! [`Optimizer::grads_per_step`] stochastic gradients at the current iterate
//! and hands them to [`Optimizer::step`]. Optimizers never touch the oracle,
//! so a two-gradient method such as SGDOL costs exactly two oracle calls per
//! step.

mod adagrad;
mod adam;
mod clip;
mod gsign;
mod projection;
mod schedule;
mod sgd;
mod sgdol;

pub use adagrad::{
    adagrad_restart_run, adagrad_restart_trace, restart_inner_iterations, AdaGradCoord, AdaGradGlobal,
};
pub use adam::{AdamConfig, AdamFamily, AdamVariant};
pub use clip::{ClipConfig, ClipSgd};
pub use gsign::{gsign_theory_hparams, GSignConfig, GSignHparams, GeneralizedSignSgd};
pub use projection::{project, ProjectionSet};
pub use schedule::{cosine_sum, Schedule};
pub use sgd::{Sgd, SgdConfig};
pub use sgdol::{ftrl_eta, surrogate_loss, Sgdol, SgdolConfig, SgdolCoord};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::Scalar;

/// Per-step bookkeeping reported by every optimizer.
///
/// Step sizes are the effective per-coordinate multipliers applied to the
/// search direction, collapsed to min/mean/max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo<T> {
    pub step_min: T,
    pub step_mean: T,
    pub step_max: T,
    /// `‖x_{t+1} − x_t‖∞`.
    pub update_linf: T,
}

impl<T: Scalar> StepInfo<T> {
    fn uniform(step: T, old: &Vector<T>, new: &Vector<T>) -> Self {
        Self { step_min: step, step_mean: step, step_max: step, update_linf: old.dist_linf(new) }
    }

    fn per_coordinate(steps: &[T], old: &Vector<T>, new: &Vector<T>) -> Self {
        let n = T::of(steps.len() as f64);
        Self {
            step_min: steps.iter().fold(T::infinity(), |m, &s| m.min(s)),
            step_mean: steps.iter().copied().sum::<T>() / n,
            step_max: steps.iter().fold(T::neg_infinity(), |m, &s| m.max(s)),
            update_linf: old.dist_linf(new),
        }
    }
}

pub trait Optimizer<T: Scalar>: Send {
    fn name(&self) -> &'static str;

    /// Stochastic gradients consumed by one call to [`Optimizer::step`].
    fn grads_per_step(&self) -> usize {
        1
    }

    fn x(&self) -> &Vector<T>;

    /// Completed steps.
    fn iteration(&self) -> u64;

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>>;
}

fn check_grads<T: Scalar>(x: &Vector<T>, grads: &[Vector<T>], want: usize) -> Result<()> {
    if grads.len() != want {
        return Err(Error::InvalidParameter(format!("expected {want} gradient(s) per step, got {}", grads.len())));
    }
    for g in grads {
        x.check_dim(g)?;
    }
    Ok(())
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// Running mean of the iterates `x_1, …, x_T` fed to it.
#[derive(Debug, Clone)]
pub struct IterateAverage<T> {
    sum: Vector<T>,
    count: u64,
}

impl<T: Scalar> IterateAverage<T> {
    pub fn new(dim: usize) -> Self {
        Self { sum: Vector::zeros(dim), count: 0 }
    }

    pub fn push(&mut self, x: &Vector<T>) {
        self.sum.axpy(T::one(), x);
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<Vector<T>> {
        (self.count > 0).then(|| self.sum.scale(T::one() / T::of(self.count as f64)))
    }
}
