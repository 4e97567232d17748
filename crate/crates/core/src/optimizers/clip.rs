use super::{check_grads, require, Optimizer, StepInfo};
use crate::error::Result;
use crate::numerics::Vector;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig<T> {
    pub eta: T,
    pub gamma: T,
    /// Use the momentum buffer `β1 b + (1 − β1) g` as the direction.
    pub momentum: bool,
    pub beta1: T,
}

/// Globally clipped SGD: `x ← x − min(η, γ/‖d‖₂) d`.
#[derive(Debug, Clone)]
pub struct ClipSgd<T> {
    x: Vector<T>,
    t: u64,
    buf: Vector<T>,
    cfg: ClipConfig<T>,
}

impl<T: Scalar> ClipSgd<T> {
    pub fn new(x0: Vector<T>, cfg: ClipConfig<T>) -> Result<Self> {
        require(cfg.eta > T::zero(), || format!("clip eta must be > 0, got {}", cfg.eta))?;
        require(cfg.gamma > T::zero(), || format!("clip gamma must be > 0, got {}", cfg.gamma))?;
        require(cfg.beta1 >= T::zero() && cfg.beta1 < T::one(), || {
            format!("clip beta1 must lie in [0, 1), got {}", cfg.beta1)
        })?;
        x0.ensure_finite("x0")?;
        let buf = Vector::zeros(x0.len());
        Ok(Self { x: x0, t: 0, buf, cfg })
    }
}

impl<T: Scalar> Optimizer<T> for ClipSgd<T> {
    fn name(&self) -> &'static str {
        if self.cfg.momentum {
            "clip_momentum"
        } else {
            "clip"
        }
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 1)?;
        let ClipConfig { eta, gamma, momentum, beta1 } = self.cfg;
        let dir = if momentum {
            self.buf = self.buf.zip_map(&grads[0], |b, g| beta1 * b + (T::one() - beta1) * g);
            self.buf.clone()
        } else {
            grads[0].clone()
        };
        let norm = dir.norm_l2();
        let step = if norm > T::zero() { eta.min(gamma / norm) } else { T::zero() };
        let mut next = self.x.clone();
        next.axpy(-step, &dir);
        let info = StepInfo::uniform(step, &self.x, &next);
        self.x = next;
        self.t += 1;
        Ok(info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_slice(xs).unwrap()
    }

    fn plain(eta: f64, gamma: f64) -> ClipConfig<f64> {
        ClipConfig { eta, gamma, momentum: false, beta1: 0.9 }
    }

    #[test]
    fn examples() {
        let mut o = ClipSgd::new(v(&[0.0, 0.0]), plain(10.0, 1.0)).unwrap();
        o.step(&[v(&[3.0, 4.0])]).unwrap();
        assert!((o.x()[0] + 0.6).abs() < 1e-15 && (o.x()[1] + 0.8).abs() < 1e-15);

        let mut o = ClipSgd::new(v(&[1.0]), plain(0.1, 1.0)).unwrap();
        o.step(&[v(&[2.0])]).unwrap();
        assert!((o.x()[0] - 0.8).abs() < 1e-15);

        let mut o = ClipSgd::new(v(&[1.0]), plain(0.1, 1.0)).unwrap();
        o.step(&[v(&[0.0])]).unwrap();
        assert_eq!(o.x()[0], 1.0);
    }

    proptest! {
        #[test]
        fn displacement_bounded(seed in 0u64..500, eta in 1e-3f64..10.0, gamma in 1e-3f64..10.0, momentum: bool) {
            let mut o = ClipSgd::new(v(&[0.0; 3]), ClipConfig { eta, gamma, momentum, beta1: 0.9 }).unwrap();
            let mut rng = Rng::new(seed);
            for _ in 0..100 {
                let scale = 10f64.powf(rng.uniform(-4.0, 4.0));
                let g = v(&[rng.gauss(0.0, scale), rng.gauss(0.0, scale), rng.gauss(0.0, scale)]);
                let before = o.x().clone();
                let buf_dir = if momentum { o.buf.zip_map(&g, |b, gi| 0.9 * b + 0.1 * gi) } else { g.clone() };
                o.step(&[g]).unwrap();
                let moved = o.x().sub(&before).norm_l2();
                prop_assert!(moved <= gamma * (1.0 + 1e-12));
                let dn = buf_dir.norm_l2();
                if dn <= gamma / eta {
                    prop_assert!((moved - eta * dn).abs() <= 1e-12 * (1.0 + eta * dn));
                }
            }
        }
    }
}
