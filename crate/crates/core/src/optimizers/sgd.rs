use super::{check_grads, require, Optimizer, ProjectionSet, Schedule, StepInfo};
use crate::error::Result;
use crate::numerics::Vector;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig<T> {
    pub schedule: Schedule<T>,
    pub momentum: T,
    pub weight_decay: T,
    pub nesterov: bool,
    /// Applied after every step.
    pub projection: ProjectionSet<T>,
}

impl<T: Scalar> SgdConfig<T> {
    pub fn plain(schedule: Schedule<T>) -> Self {
        Self {
            schedule,
            momentum: T::zero(),
            weight_decay: T::zero(),
            nesterov: false,
            projection: ProjectionSet::None,
        }
    }
}

/// SGD with optional heavy-ball or Nesterov momentum, ℓ2 weight decay and
/// projection.
#[derive(Debug, Clone)]
pub struct Sgd<T> {
    x: Vector<T>,
    t: u64,
    buf: Vector<T>,
    cfg: SgdConfig<T>,
}

impl<T: Scalar> Sgd<T> {
    pub fn new(x0: Vector<T>, cfg: SgdConfig<T>) -> Result<Self> {
        cfg.schedule.validate()?;
        require(cfg.momentum >= T::zero() && cfg.momentum < T::one(), || {
            format!("momentum must lie in [0, 1), got {}", cfg.momentum)
        })?;
        require(cfg.weight_decay >= T::zero(), || format!("weight_decay must be >= 0, got {}", cfg.weight_decay))?;
        x0.ensure_finite("x0")?;
        let buf = Vector::zeros(x0.len());
        Ok(Self { x: x0, t: 0, buf, cfg })
    }

    /// One step with an explicit step size, bypassing the schedule.
    pub fn step_with(&mut self, grad: &Vector<T>, eta: T) -> Result<StepInfo<T>> {
        self.x.check_dim(grad)?;
        let mut g = grad.clone();
        if self.cfg.weight_decay > T::zero() {
            g.axpy(self.cfg.weight_decay, &self.x);
        }
        let mu = self.cfg.momentum;
        let dir = if mu > T::zero() {
            self.buf = self.buf.zip_map(&g, |b, gi| mu * b + gi);
            if self.cfg.nesterov {
                self.buf.zip_map(&g, |b, gi| mu * b + gi)
            } else {
                self.buf.clone()
            }
        } else {
            g
        };
        let mut next = self.x.clone();
        next.axpy(-eta, &dir);
        let next = self.cfg.projection.project(&next);
        let info = StepInfo::uniform(eta, &self.x, &next);
        self.x = next;
        self.t += 1;
        Ok(info)
    }
}

impl<T: Scalar> Optimizer<T> for Sgd<T> {
    fn name(&self) -> &'static str {
        "sgd"
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 1)?;
        let eta = self.cfg.schedule.eval(self.t + 1)?;
        self.step_with(&grads[0], eta)
    }
}
