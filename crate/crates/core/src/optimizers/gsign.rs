use super::{check_grads, require, Optimizer, StepInfo};
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSignConfig<T> {
    pub eta: T,
    pub beta1: T,
    pub beta2: T,
}

/// Generalized SignSGD: `x ← x − η m/√v` with `v` tracking `m²`, no bias
/// correction and `0/0 := 0`.
#[derive(Debug, Clone)]
pub struct GeneralizedSignSgd<T> {
    x: Vector<T>,
    t: u64,
    m: Vector<T>,
    v: Vector<T>,
    cfg: GSignConfig<T>,
    max_ratio: T,
}

impl<T: Scalar> GeneralizedSignSgd<T> {
    pub fn new(x0: Vector<T>, cfg: GSignConfig<T>) -> Result<Self> {
        let unit = |b: T| b >= T::zero() && b < T::one();
        require(cfg.eta > T::zero(), || format!("gsign eta must be > 0, got {}", cfg.eta))?;
        require(unit(cfg.beta1) && unit(cfg.beta2), || {
            format!("gsign betas must lie in [0, 1), got ({}, {})", cfg.beta1, cfg.beta2)
        })?;
        x0.ensure_finite("x0")?;
        let d = x0.len();
        Ok(Self { x: x0, t: 0, m: Vector::zeros(d), v: Vector::zeros(d), cfg, max_ratio: T::zero() })
    }

    /// Upper bound on every per-coordinate update magnitude, `η/√(1−β2)`.
    pub fn update_bound(&self) -> T {
        self.cfg.eta / (T::one() - self.cfg.beta2).sqrt()
    }

    /// Largest `|m_j|/√v_j` seen so far.
    pub fn max_ratio(&self) -> T {
        self.max_ratio
    }
}

impl<T: Scalar> Optimizer<T> for GeneralizedSignSgd<T> {
    fn name(&self) -> &'static str {
        "gsign"
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 1)?;
        let GSignConfig { eta, beta1, beta2 } = self.cfg;
        let one = T::one();
        self.m = self.m.zip_map(&grads[0], |m, g| beta1 * m + (one - beta1) * g);
        self.v = self.v.zip_map(&self.m, |v, m| beta2 * v + (one - beta2) * m * m);
        let mut next = self.x.clone();
        let mut steps = Vec::with_capacity(next.len());
        for j in 0..next.len() {
            let root = self.v[j].sqrt();
            if root > T::zero() {
                let ratio = self.m[j] / root;
                self.max_ratio = self.max_ratio.max(ratio.abs());
                next[j] -= eta * ratio;
                steps.push(eta / root);
            } else {
                steps.push(T::zero());
            }
        }
        let info = StepInfo::per_coordinate(&steps, &self.x, &next);
        self.x = next;
        self.t += 1;
        Ok(info)
    }
}

/// Theory-prescribed hyperparameters for Generalized SignSGD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSignHparams<T> {
    pub eta: T,
    pub beta1: T,
    pub alpha: T,
    /// `1 − √β2/β1`; exactly 1 when `β2 = 0`.
    pub rho: T,
}

/// `α = min(√‖L0‖₁ √Δ / (‖σ‖₁ √T), 1)`, `β1 = 1 − α`, `η = √(Δα) / (√‖L0‖₁ √T)`.
///
/// Requires `β2 < β1²` unless `β2 = 0`, in which case the momentum-free bound
/// applies and `ρ = 1`.
pub fn gsign_theory_hparams<T: Scalar>(
    delta_ub: T,
    l0: &Vector<T>,
    sigma: &Vector<T>,
    horizon: u64,
    beta2: T,
) -> Result<GSignHparams<T>> {
    require(delta_ub > T::zero(), || format!("delta upper bound must be > 0, got {delta_ub}"))?;
    require(horizon >= 1, || "horizon must be >= 1".into())?;
    require(beta2 >= T::zero() && beta2 < T::one(), || format!("beta2 must lie in [0, 1), got {beta2}"))?;
    if l0.iter().chain(sigma.iter()).any(|&c| c < T::zero()) {
        return Err(Error::InvalidParameter("L0 and sigma entries must be >= 0".into()));
    }
    let l0_norm = l0.norm_l1();
    require(l0_norm > T::zero(), || "‖L0‖₁ must be > 0".into())?;
    let sqrt_t = T::of(horizon as f64).sqrt();
    let sigma_norm = sigma.norm_l1();
    let alpha = if sigma_norm > T::zero() {
        (l0_norm.sqrt() * delta_ub.sqrt() / (sigma_norm * sqrt_t)).min(T::one())
    } else {
        T::one()
    };
    let beta1 = T::one() - alpha;
    let eta = (delta_ub * alpha).sqrt() / (l0_norm.sqrt() * sqrt_t);
    let rho = if beta2 == T::zero() {
        T::one()
    } else if beta2 < beta1 * beta1 {
        T::one() - beta2.sqrt() / beta1
    } else {
        return Err(Error::InvalidParameter(format!("beta2={beta2} must be below beta1²={}", beta1 * beta1)));
    };
    Ok(GSignHparams { eta, beta1, alpha, rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_slice(xs).unwrap()
    }

    fn run_checked(o: &mut GeneralizedSignSgd<f64>, g: &Vector<f64>) {
        let before = o.x().clone();
        o.step(&[g.clone()]).unwrap();
        let bound = o.update_bound() * (1.0 + 1e-12);
        assert!(before.dist_linf(o.x()) <= bound);
    }

    #[test]
    fn beta2_zero_is_sign_descent() {
        let mut o = GeneralizedSignSgd::new(v(&[0.0, 0.0, 0.0]), GSignConfig { eta: 0.1, beta1: 0.5, beta2: 0.0 }).unwrap();
        run_checked(&mut o, &v(&[3.0, -1e-7, 0.0]));
        assert_eq!(o.x(), &v(&[-0.1, 0.1, 0.0]));
    }

    #[test]
    fn zero_gradients_never_move() {
        let mut o = GeneralizedSignSgd::new(v(&[1.0, 2.0]), GSignConfig { eta: 0.1, beta1: 0.9, beta2: 0.99 }).unwrap();
        for _ in 0..100 {
            run_checked(&mut o, &v(&[0.0, 0.0]));
        }
        assert_eq!(o.x(), &v(&[1.0, 2.0]));
    }

    #[test]
    fn theory_examples() {
        let h = gsign_theory_hparams(1.0, &v(&[1.0, 3.0]), &v(&[0.0, 0.0]), 100, 0.0).unwrap();
        assert_eq!((h.alpha, h.beta1), (1.0, 0.0));
        assert!((h.eta - 1.0 / (2.0 * 10.0)).abs() < 1e-15);

        let h = gsign_theory_hparams(1.0, &v(&[4.0]), &v(&[1.0, 1.0]), 400, 0.0).unwrap();
        assert!((h.alpha - 0.05).abs() < 1e-15);
        assert!((h.beta1 - 0.95).abs() < 1e-15);
        assert!((h.eta - 0.05f64.sqrt() / 40.0).abs() < 1e-15);
        assert!((h.eta - 0.005590).abs() < 1e-6);

        let b2 = h.beta1 * h.beta1 / 2.0;
        let h2 = gsign_theory_hparams(1.0, &v(&[4.0]), &v(&[1.0, 1.0]), 400, b2).unwrap();
        assert!((h2.rho - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!((h2.rho - 0.2929).abs() < 1e-4);
    }

    #[test]
    fn theory_rejections() {
        assert!(gsign_theory_hparams(1.0, &v(&[4.0]), &v(&[1.0]), 400, 0.95).is_err());
        assert!(gsign_theory_hparams(1.0, &v(&[1.0]), &v(&[0.0]), 100, 0.5).is_err());
        assert!(gsign_theory_hparams(0.0, &v(&[1.0]), &v(&[1.0]), 100, 0.0).is_err());
        assert!(gsign_theory_hparams(1.0, &v(&[0.0]), &v(&[1.0]), 100, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn bounded_updates(seed in 0u64..500, beta1 in 0.0f64..0.999, beta2 in 0.0f64..0.999) {
            let mut o = GeneralizedSignSgd::new(v(&[0.0; 4]), GSignConfig { eta: 0.01, beta1, beta2 }).unwrap();
            let mut rng = Rng::new(seed);
            for _ in 0..200 {
                let scale = 10f64.powf(rng.uniform(-8.0, 8.0));
                let g = v(&[rng.gauss(0.0, scale), rng.gauss(0.0, 1.0), 0.0, rng.uniform(-1.0, 1.0)]);
                run_checked(&mut o, &g);
            }
            prop_assert!(o.max_ratio() <= (1.0 / (1.0 - beta2).sqrt()) * (1.0 + 1e-12));
        }

        #[test]
        fn scale_free(seed in 0u64..500, scales in proptest::collection::vec(-6.0f64..6.0, 3)) {
            let lambda_diag = Vector::from_slice(&scales.iter().map(|s| 10f64.powf(*s)).collect::<Vec<_>>()).unwrap();
            let c = GSignConfig { eta: 0.01, beta1: 0.9, beta2: 0.5 };
            let mut plain = GeneralizedSignSgd::new(v(&[1.0, -0.5, 2.0]), c).unwrap();
            let mut scaled = plain.clone();
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
