use super::{check_grads, require, Optimizer, StepInfo};
use crate::error::Result;
use crate::numerics::Vector;
use crate::Scalar;

/// Closed-form FTRL step size over `[0, 2/L]` for the regularizer
/// `Lα/2 (η − 1/L)²` and the history of surrogate losses.
pub fn ftrl_eta<T: Scalar>(s_inner: T, s_norm: T, alpha: T, l: T) -> T {
    let raw = (alpha + s_inner) / (l * (alpha + s_norm));
    raw.min(T::of(2.0) / l).max(T::zero())
}

/// `ℓ(η) = −η⟨g, g'⟩ + Lη²‖g‖²/2`.
pub fn surrogate_loss<T: Scalar>(eta: T, inner: T, norm_sq: T, l: T) -> T {
    -eta * inner + l * eta * eta * norm_sq / T::of(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdolConfig<T> {
    pub alpha: T,
    /// Assumed smoothness; may deliberately differ from the true constant.
    pub l: T,
}

impl<T: Scalar> SgdolConfig<T> {
    fn validate(&self) -> Result<()> {
        require(self.alpha > T::zero(), || format!("sgdol alpha must be > 0, got {}", self.alpha))?;
        require(self.l > T::zero(), || format!("sgdol L must be > 0, got {}", self.l))
    }
}

/// SGD whose global step size is chosen by FTRL on surrogate losses built
/// from two independent gradients per step.
#[derive(Debug, Clone)]
pub struct Sgdol<T> {
    x: Vector<T>,
    t: u64,
    s_inner: T,
    s_norm: T,
    cfg: SgdolConfig<T>,
}

impl<T: Scalar> Sgdol<T> {
    pub fn new(x0: Vector<T>, cfg: SgdolConfig<T>) -> Result<Self> {
        cfg.validate()?;
        x0.ensure_finite("x0")?;
        Ok(Self { x: x0, t: 0, s_inner: T::zero(), s_norm: T::zero(), cfg })
    }

    /// Step size the next step will use.
    pub fn current_eta(&self) -> T {
        ftrl_eta(self.s_inner, self.s_norm, self.cfg.alpha, self.cfg.l)
    }

    /// `(Σ⟨g, g'⟩, Σ‖g‖²)` over completed steps.
    pub fn sums(&self) -> (T, T) {
        (self.s_inner, self.s_norm)
    }
}

impl<T: Scalar> Optimizer<T> for Sgdol<T> {
    fn name(&self) -> &'static str {
        "sgdol"
    }

    fn grads_per_step(&self) -> usize {
        2
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 2)?;
        let (g, gp) = (&grads[0], &grads[1]);
        let eta = self.current_eta();
        let mut next = self.x.clone();
        next.axpy(-eta, g);
        let info = StepInfo::uniform(eta, &self.x, &next);
        self.x = next;
        self.s_inner += g.dot(gp)?;
        self.s_norm += g.norm_sq();
        self.t += 1;
        Ok(info)
    }
}

/// Per-coordinate SGDOL: an independent FTRL step size for every coordinate.
#[derive(Debug, Clone)]
pub struct SgdolCoord<T> {
    x: Vector<T>,
    t: u64,
    s_inner: Vector<T>,
    s_norm: Vector<T>,
    cfg: SgdolConfig<T>,
}

impl<T: Scalar> SgdolCoord<T> {
    pub fn new(x0: Vector<T>, cfg: SgdolConfig<T>) -> Result<Self> {
        cfg.validate()?;
        x0.ensure_finite("x0")?;
        let d = x0.len();
        Ok(Self { x: x0, t: 0, s_inner: Vector::zeros(d), s_norm: Vector::zeros(d), cfg })
    }

    pub fn current_etas(&self) -> Vector<T> {
        self.s_inner.zip_map(&self.s_norm, |si, sn| ftrl_eta(si, sn, self.cfg.alpha, self.cfg.l))
    }
}

impl<T: Scalar> Optimizer<T> for SgdolCoord<T> {
    fn name(&self) -> &'static str {
        "sgdol_coord"
    }

    fn grads_per_step(&self) -> usize {
        2
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 2)?;
        let (g, gp) = (&grads[0], &grads[1]);
        let etas = self.current_etas();
        let next = self.x.zip_map(&etas.hadamard(g), |xi, u| xi - u);
        let info = StepInfo::per_coordinate(etas.as_slice(), &self.x, &next);
        self.x = next;
        self.s_inner = self.s_inner.add(&g.hadamard(gp));
        self.s_norm = self.s_norm.add(&g.hadamard(g));
        self.t += 1;
        Ok(info)
    }
}
