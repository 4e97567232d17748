//! Objective-function suite.
//!
//! Analytic one-dimensional test functions (including both lower-bound
//! constructions for relaxed smoothness), diagonal quadratics and their
//! preconditioned twins, and finite-sum robust regression over datasets read
//! from LibSVM text or generated synthetically.

mod analytic;
mod dataset;
mod regression;

pub use analytic::{
    make_exp_branch, make_fraction_poly, make_pl_sin, make_quadratic, make_quartic_capped,
    precondition_quadratic, ExpBranch, FractionPoly, PlSin, Quadratic, QuarticCapped,
};
pub use dataset::{
    balance_and_bias, parse_libsvm, parse_libsvm_str, synth_classification, synth_classification_with_truth,
    write_libsvm, Dataset,
};
pub use regression::{make_robust_regression, phi, phi_prime, RobustRegression};

use crate::numerics::Vector;
use crate::optimizers::ProjectionSet;
use crate::Scalar;

/// Known structural facts about a problem. Every field is optional.
#[derive(Debug, Clone, Default)]
pub struct ProblemMeta<T> {
    pub f_star: Option<T>,
    pub minimizer: Option<Vector<T>>,
    pub mu_pl: Option<T>,
    pub smooth_l: Option<T>,
    pub l0: Option<Vector<T>>,
    pub l1: Option<Vector<T>>,
    pub grad_bound_m: Option<Vector<T>>,
    pub domain: Option<ProjectionSet<T>>,
}

/// Deterministic differentiable objective, possibly a finite sum.
///
/// For finite sums `grad` is the mean of `component_grad` over all components.
pub trait Problem<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn eval(&self, x: &Vector<T>) -> T;

    fn grad(&self, x: &Vector<T>) -> Vector<T>;

    fn component_count(&self) -> usize {
        1
    }

    fn component_grad(&self, x: &Vector<T>, index: usize) -> Vector<T> {
        debug_assert_eq!(index, 0);
        self.grad(x)
    }

    fn meta(&self) -> &ProblemMeta<T>;
}
