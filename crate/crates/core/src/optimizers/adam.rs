use serde::{Deserialize, Serialize};

use super::{check_grads, require, Optimizer, Schedule, StepInfo};
use crate::error::Result;
use crate::numerics::Vector;
use crate::Scalar;

/// How the regularization weight `λ` enters the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdamVariant {
    /// `λx` added to the gradient (Adam-ℓ2).
    L2,
    /// Multiplicative decay `(1 − η_t λ)` outside the adaptive step (AdamW).
    Decoupled,
    /// Proximal decay `(1 + η_t λ)^{-1}` after the adaptive step.
    Proximal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig<T> {
    pub alpha: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub lambda: T,
    pub variant: AdamVariant,
    /// Multiplier `η_t` on both the adaptive step and the decay.
    pub schedule: Schedule<T>,
}

impl<T: Scalar> AdamConfig<T> {
    pub fn new(alpha: T, variant: AdamVariant, lambda: T) -> Self {
        Self {
            alpha,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
            lambda,
            variant,
            schedule: Schedule::constant(T::one()),
        }
    }
}

/// Adam with bias correction and ℓ2, decoupled or proximal weight decay.
#[derive(Debug, Clone)]
pub struct AdamFamily<T> {
    x: Vector<T>,
    t: u64,
    m: Vector<T>,
    v: Vector<T>,
    beta1_pow: T,
    beta2_pow: T,
    cfg: AdamConfig<T>,
}

impl<T: Scalar> AdamFamily<T> {
    pub fn new(x0: Vector<T>, cfg: AdamConfig<T>) -> Result<Self> {
        cfg.schedule.validate()?;
        let unit = |b: T| b >= T::zero() && b < T::one();
        require(cfg.alpha > T::zero(), || format!("adam alpha must be > 0, got {}", cfg.alpha))?;
        require(unit(cfg.beta1) && unit(cfg.beta2), || {
            format!("adam betas must lie in [0, 1), got ({}, {})", cfg.beta1, cfg.beta2)
        })?;
        require(cfg.eps >= T::zero(), || format!("adam eps must be >= 0, got {}", cfg.eps))?;
        require(cfg.lambda >= T::zero(), || format!("adam lambda must be >= 0, got {}", cfg.lambda))?;
        x0.ensure_finite("x0")?;
        let d = x0.len();
        Ok(Self { x: x0, t: 0, m: Vector::zeros(d), v: Vector::zeros(d), beta1_pow: T::one(), beta2_pow: T::one(), cfg })
    }

    pub fn config(&self) -> &AdamConfig<T> {
        &self.cfg
    }
}

impl<T: Scalar> Optimizer<T> for AdamFamily<T> {
    fn name(&self) -> &'static str {
        match self.cfg.variant {
            AdamVariant::L2 => "adam_l2",
            AdamVariant::Decoupled => "adamw",
            AdamVariant::Proximal => "adam_prox",
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
        let c = self.cfg;
        let eta = c.schedule.eval(self.t + 1)?;
        let mut g = grads[0].clone();
        if c.variant == AdamVariant::L2 {
            g.axpy(c.lambda, &self.x);
        }
        let one = T::one();
        self.m = self.m.zip_map(&g, |m, gi| c.beta1 * m + (one - c.beta1) * gi);
        self.v = self.v.zip_map(&g, |v, gi| c.beta2 * v + (one - c.beta2) * gi * gi);
        self.beta1_pow *= c.beta1;
        self.beta2_pow *= c.beta2;
        let (bc1, bc2) = (one - self.beta1_pow, one - self.beta2_pow);
        let scale = eta * c.alpha;
        let d = self.x.len();
        let mut steps = Vec::with_capacity(d);
        let mut next = self.x.clone();
        for j in 0..d {
            let m_hat = self.m[j] / bc1;
            let denom = (self.v[j] / bc2).sqrt() + c.eps;
            let (dir, mult) = if denom > T::zero() { (m_hat / denom, scale / denom) } else { (T::zero(), T::zero()) };
            let moved = self.x[j] - scale * dir;
            next[j] = match c.variant {
                AdamVariant::L2 => moved,
                AdamVariant::Decoupled => (one - eta * c.lambda) * self.x[j] - scale * dir,
                AdamVariant::Proximal => moved / (one + eta * c.lambda),
            };
            steps.push(mult);
        }
        let info = StepInfo::per_coordinate(&steps, &self.x, &next);
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

    fn cfg(variant: AdamVariant, lambda: f64, eps: f64) -> AdamConfig<f64> {
        AdamConfig { eps, ..AdamConfig::new(0.01, variant, lambda) }
    }

    #[test]
    fn first_step_moves_eta_alpha() {
        for variant in [AdamVariant::L2, AdamVariant::Decoupled, AdamVariant::Proximal] {
            let mut o = AdamFamily::new(v(&[1.0, -2.0, 0.5]), cfg(variant, 0.0, 0.0)).unwrap();
            o.step(&[v(&[3.0, -1e-4, 7e5])]).unwrap();
            let expected = [1.0 - 0.01, -2.0 + 0.01, 0.5 - 0.01];
            for j in 0..3 {
                assert!((o.x()[j] - expected[j]).abs() < 1e-15, "{variant:?}");
            }
        }
    }

    #[test]
    fn zero_gradient_coordinate_stays() {
        let mut o = AdamFamily::new(v(&[1.0, 2.0]), cfg(AdamVariant::L2, 0.0, 0.0)).unwrap();
        o.step(&[v(&[1.0, 0.0])]).unwrap();
        assert_eq!(o.x()[1], 2.0);
    }

    #[test]
    fn decay_factors_agree_to_first_order() {
        let x0 = v(&[1.0]);
        let c = |variant| AdamConfig { alpha: 1e-30, ..cfg(variant, 0.01, 0.0) };
        let mut w = AdamFamily::new(x0.clone(), c(AdamVariant::Decoupled)).unwrap();
        let mut p = AdamFamily::new(x0, c(AdamVariant::Proximal)).unwrap();
        w.step(&[v(&[1.0])]).unwrap();
        p.step(&[v(&[1.0])]).unwrap();
        let gap = (w.x()[0] - p.x()[0]).abs();
        assert!((gap - (1.0 / 1.01 - 0.99)).abs() < 1e-12);
        assert!((gap - 9.9e-5).abs() < 1e-6);
    }

    #[test]
    fn variants_coincide_bitwise_without_decay() {
        let mut rng = Rng::new(9);
        let x0 = v(&[0.3, -1.2, 4.0, 0.0]);
        let mut runs: Vec<_> = [AdamVariant::L2, AdamVariant::Decoupled, AdamVariant::Proximal]
            .into_iter()
            .map(|variant| {
                let c = AdamConfig { schedule: Schedule::Cosine { eta0: 1.0, horizon: 300 }, ..cfg(variant, 0.0, 1e-8) };
                AdamFamily::new(x0.clone(), c).unwrap()
            })
            .collect();
        for _ in 0..300 {
            let g = runs[0].x().map(|xi| xi + rng.gauss(0.0, 0.5));
            for r in &mut runs {
                r.step(&[g.clone()]).unwrap();
            }
            let bits = |o: &AdamFamily<f64>| o.x().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&runs[0]), bits(&runs[1]));
            assert_eq!(bits(&runs[0]), bits(&runs[2]));
        }
    }

    proptest! {
        #[test]
        fn adamw_scale_free(seed in 0u64..1000, scales in proptest::collection::vec(-6.0f64..6.0, 3)) {
            let lambda_diag = Vector::from_slice(&scales.iter().map(|s| 10f64.powf(*s)).collect::<Vec<_>>()).unwrap();
            let c = cfg(AdamVariant::Decoupled, 0.1, 0.0);
            let x0 = v(&[1.0, -0.5, 2.0]);
            let mut plain = AdamFamily::new(x0.clone(), c).unwrap();
            let mut scaled = AdamFamily::new(x0, c).unwrap();
            let mut rng = Rng::new(seed);
            for _ in 0..100 {
                let g = plain.x().map(|xi| xi + rng.gauss(0.0, 1.0));
                plain.step(&[g.clone()]).unwrap();
                scaled.step(&[g.hadamard(&lambda_diag)]).unwrap();
                prop_assert!(plain.x().dist_linf(scaled.x()) <= 1e-9);
            }
        }
    }
}
