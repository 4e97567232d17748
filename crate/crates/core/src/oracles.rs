//! Stochastic gradient sources.
//!
//! A [`GradOracle`] owns a problem handle, a noise model and its own random
//! stream. Paired draws for two-gradient methods come from consecutive,
//! disjoint segments of that stream.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Rng, Vector};
use crate::problems::Problem;
use crate::Scalar;

/// Noise added to (or sampling scheme for) the true gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel<T> {
    None,
    /// Isotropic gaussian with total variance `sigma²`.
    Gaussian { sigma: T },
    /// Isotropic gaussian with total variance `a‖∇F‖² + b`.
    Relaxed { a: T, b: T },
    /// Independent uniforms on `[-sigma_j, sigma_j]`.
    BoundedCoord { sigma: Vector<T> },
    /// Mean of component gradients over a batch drawn without replacement.
    Minibatch { batch: usize },
}

impl<T: Scalar> NoiseModel<T> {
    pub fn validate(&self, problem: &dyn Problem<T>) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::Gaussian { sigma } if *sigma >= T::zero() => Ok(()),
            NoiseModel::Gaussian { sigma } => Err(Error::InvalidParameter(format!("gaussian sigma {sigma} < 0"))),
            NoiseModel::Relaxed { a, b } if *a >= T::zero() && *b >= T::zero() => Ok(()),
            NoiseModel::Relaxed { a, b } => Err(Error::InvalidParameter(format!("relaxed noise a={a}, b={b} must be >= 0"))),
            NoiseModel::BoundedCoord { sigma } => {
                if sigma.len() != problem.dim() {
                    return Err(Error::Dimension { expected: problem.dim(), got: sigma.len() });
                }
                if sigma.iter().any(|s| *s < T::zero()) {
                    return Err(Error::InvalidParameter("bounded_coord sigma entries must be >= 0".into()));
                }
                Ok(())
            }
            NoiseModel::Minibatch { batch } => {
                let m = problem.component_count();
                if m == 1 {
                    return Err(Error::UnsupportedNoise(format!(
                        "minibatch sampling needs a finite-sum problem; '{}' has one component",
                        problem.name()
                    )));
                }
                if *batch < 1 || *batch > m {
                    return Err(Error::InvalidParameter(format!("batch {batch} outside 1..={m}")));
                }
                Ok(())
            }
        }
    }
}

/// Stochastic first-order oracle: problem + noise model + private stream.
pub struct GradOracle<T: Scalar> {
    problem: Arc<dyn Problem<T>>,
    noise: NoiseModel<T>,
    rng: Rng,
    calls: u64,
}

impl<T: Scalar> GradOracle<T> {
    pub fn new(problem: Arc<dyn Problem<T>>, noise: NoiseModel<T>, rng: Rng) -> Result<Self> {
        noise.validate(problem.as_ref())?;
        Ok(Self { problem, noise, rng, calls: 0 })
    }

    pub fn problem(&self) -> &dyn Problem<T> {
        self.problem.as_ref()
    }

    pub fn noise(&self) -> &NoiseModel<T> {
        &self.noise
    }

    /// Number of stochastic gradients drawn so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn rng_position(&self) -> u64 {
        self.rng.position()
    }

    /// One unbiased stochastic gradient at `x`.
    pub fn sample_grad(&mut self, x: &Vector<T>) -> Result<Vector<T>> {
        if x.len() != self.problem.dim() {
            return Err(Error::Dimension { expected: self.problem.dim(), got: x.len() });
        }
        x.ensure_finite("oracle query point")?;
        self.calls += 1;
        let d = x.len();
        let g = match &self.noise {
            NoiseModel::None => self.problem.grad(x),
            NoiseModel::Gaussian { sigma } => {
                let sd = sigma.as_f64() / (d as f64).sqrt();
                let mut g = self.problem.grad(x);
                for v in g.iter_mut() {
                    *v += T::of(self.rng.gauss(0.0, sd));
                }
                g
            }
            NoiseModel::Relaxed { a, b } => {
                let mut g = self.problem.grad(x);
                let total = a.as_f64() * g.norm_sq().as_f64() + b.as_f64();
                let sd = (total / d as f64).sqrt();
                for v in g.iter_mut() {
                    *v += T::of(self.rng.gauss(0.0, sd));
                }
                g
            }
            NoiseModel::BoundedCoord { sigma } => {
                let mut g = self.problem.grad(x);
                for (v, s) in g.iter_mut().zip(sigma.iter()) {
                    let s = s.as_f64();
                    let xi = T::of(s * (2.0 * self.rng.next_f64() - 1.0));
                    debug_assert!(xi.abs() <= T::of(s));
                    *v += xi;
                }
                g
            }
            NoiseModel::Minibatch { batch } => {
                let m = self.problem.component_count();
                if *batch == m {
                    self.problem.grad(x)
                } else {
                    let idx = self.rng.sample_without_replacement(m, *batch);
                    let mut acc = vec![T::zero(); d];
                    for &i in &idx {
                        for (a, c) in acc.iter_mut().zip(self.problem.component_grad(x, i).iter()) {
                            *a += *c;
                        }
                    }
                    let inv = T::one() / T::of(*batch as f64);
                    Vector::new(acc.into_iter().map(|v| v * inv).collect())?
                }
            }
        };
        g.ensure_finite("stochastic gradient")?;
        Ok(g)
    }

    /// Two independent draws at the same point.
    pub fn sample_two_grads(&mut self, x: &Vector<T>) -> Result<(Vector<T>, Vector<T>)> {
        let g = self.sample_grad(x)?;
        let g_prime = self.sample_grad(x)?;
        Ok((g, g_prime))
    }

    /// `count` independent draws at `x`, as requested by an optimizer step.
    pub fn draw(&mut self, x: &Vector<T>, count: usize) -> Result<Vec<Vector<T>>> {
        (0..count).map(|_| self.sample_grad(x)).collect()
    }

    /// `n` draws at `x`: returns the sup-norm of the empirical bias and the
    /// empirical `E‖g − ∇F‖²`.
    pub fn variance_audit(&mut self, x: &Vector<T>, n: usize) -> Result<VarianceAudit> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("variance audit needs n >= 2, got {n}")));
        }
        let truth = self.problem.grad(x).to_f64_vec();
        let d = truth.len();
        let mut sum = vec![0.0; d];
        let mut sq = 0.0;
        for _ in 0..n {
            let g = self.sample_grad(x)?;
            for j in 0..d {
                let e = g[j].as_f64() - truth[j];
                sum[j] += e;
                sq += e * e;
            }
        }
        let mean_err_linf = sum.iter().fold(0.0f64, |m, s| m.max((s / n as f64).abs()));
        Ok(VarianceAudit { mean_err_linf, var_est: sq / n as f64 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceAudit {
    pub mean_err_linf: f64,
    pub var_est: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_fraction_poly, make_quadratic, make_robust_regression, synth_classification};

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_slice(xs).unwrap()
    }

    fn quad() -> Arc<dyn Problem<f64>> {
        Arc::new(make_quadratic(v(&[1.0, 2.0, 3.0]), v(&[1.0, -1.0, 0.5]), 0.0).unwrap())
    }

    fn oracle(p: Arc<dyn Problem<f64>>, noise: NoiseModel<f64>, seed: u64) -> GradOracle<f64> {
        GradOracle::new(p, noise, Rng::new(seed)).unwrap()
    }

    #[test]
    fn noiseless_is_exact() {
        let p = quad();
        let x = v(&[0.3, 0.2, -1.0]);
        let mut o = oracle(p.clone(), NoiseModel::None, 0);
        assert_eq!(o.sample_grad(&x).unwrap(), p.grad(&x));
        let (g, gp) = o.sample_two_grads(&x).unwrap();
        assert_eq!(g, p.grad(&x));
        assert_eq!(gp, p.grad(&x));
        assert_eq!(o.calls(), 3);
        let audit = o.variance_audit(&x, 10).unwrap();
        assert_eq!(audit, VarianceAudit { mean_err_linf: 0.0, var_est: 0.0 });
    }

    #[test]
    fn gaussian_is_unbiased_with_total_variance_sigma_sq() {
        let p = quad();
        let x = v(&[0.3, 0.2, -1.0]);
        let sigma = 2.0;
        let n = 100_000;
        let mut o = oracle(p.clone(), NoiseModel::Gaussian { sigma }, 17);
        let audit = o.variance_audit(&x, n).unwrap();
        let bound = 3.0 * sigma / ((3 * n) as f64).sqrt();
        assert!(audit.mean_err_linf <= bound, "{} > {bound}", audit.mean_err_linf);
        assert!((audit.var_est - sigma * sigma).abs() <= 0.05 * sigma * sigma, "{}", audit.var_est);
    }

    #[test]
    fn paired_draws_are_uncorrelated_and_inner_product_is_unbiased() {
        let p = quad();
        let x = v(&[1.0, 0.5, -0.5]);
        let truth = p.grad(&x);
        let target = truth.norm_sq();
        let mut o = oracle(p.clone(), NoiseModel::Gaussian { sigma: 1.0 }, 99);
        let n = 100_000;
        let mut inner = 0.0;
        let (mut sxy, mut sxx, mut syy) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        for _ in 0..n {
            let before = o.rng_position();
            let (g, gp) = o.sample_two_grads(&x).unwrap();
            assert!(o.rng_position() > before);
            inner += g.dot(&gp).unwrap();
            for j in 0..3 {
                let (a, b) = (g[j] - truth[j], gp[j] - truth[j]);
                sxy[j] += a * b;
                sxx[j] += a * a;
                syy[j] += b * b;
            }
        }
        let mean_inner = inner / n as f64;
        assert!((mean_inner - target).abs() <= 0.05 * target, "{mean_inner} vs {target}");
        for j in 0..3 {
            let corr = sxy[j] / (sxx[j] * syy[j]).sqrt();
            assert!(corr.abs() <= 0.02, "corr[{j}] = {corr}");
        }
        assert_eq!(o.calls(), 2 * n as u64);
    }

    #[test]
    fn relaxed_variance_scales_with_grad_norm() {
        // ∇F = 2 at x = 1 for F = x², so ‖∇F‖² = 4.
        let p: Arc<dyn Problem<f64>> = Arc::new(make_quadratic(v(&[2.0]), v(&[0.0]), 0.0).unwrap());
        let mut o = oracle(p, NoiseModel::Relaxed { a: 1.0, b: 0.0 }, 5);
        let audit = o.variance_audit(&v(&[1.0]), 100_000).unwrap();
        assert!((audit.var_est - 4.0).abs() <= 0.4, "{}", audit.var_est);
    }

    #[test]
    fn bounded_coord_variance_and_support() {
        let p: Arc<dyn Problem<f64>> = Arc::new(make_quadratic(v(&[1.0, 1.0]), v(&[0.0, 0.0]), 0.0).unwrap());
        let x = v(&[0.5, -0.5]);
        let truth = p.grad(&x);
        let sigma = v(&[3.0, 3.0]);
        let mut o = oracle(p.clone(), NoiseModel::BoundedCoord { sigma: sigma.clone() }, 1);
        for _ in 0..10_000 {
            let g = o.sample_grad(&x).unwrap();
            for j in 0..2 {
                assert!((g[j] - truth[j]).abs() <= sigma[j]);
            }
        }
        let audit = o.variance_audit(&x, 100_000).unwrap();
        assert!((audit.var_est - 6.0).abs() <= 0.6, "{}", audit.var_est);
    }

    #[test]
    fn unbiased_across_models_and_points() {
        let p = quad();
        let models = vec![
            NoiseModel::Gaussian { sigma: 1.5 },
            NoiseModel::Relaxed { a: 0.5, b: 0.2 },
            NoiseModel::BoundedCoord { sigma: v(&[1.0, 0.5, 2.0]) },
        ];
        let mut rng = Rng::new(123);
        for model in models {
            for k in 0..10 {
                let x = v(&[rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)]);
                let truth = p.grad(&x);
                let mut o = oracle(p.clone(), model.clone(), 1000 + k);
                let n = 20_000;
                let mut sum = [0.0; 3];
                let mut sq = [0.0; 3];
                for _ in 0..n {
                    let g = o.sample_grad(&x).unwrap();
                    for j in 0..3 {
                        let e = g[j] - truth[j];
                        sum[j] += e;
                        sq[j] += e * e;
                    }
                }
                for j in 0..3 {
                    let mean = sum[j] / n as f64;
                    let sd = (sq[j] / n as f64 - mean * mean).sqrt();
                    assert!(mean.abs() <= 4.0 * sd / (n as f64).sqrt(), "{model:?} coord {j}");
                }
            }
        }
    }

    #[test]
    fn minibatch_behaviour() {
        let data = synth_classification::<f64>(40, 3, 0.2, &mut Rng::new(2)).unwrap();
        let p: Arc<dyn Problem<f64>> = Arc::new(make_robust_regression(data).unwrap());
        let x = v(&[0.1, -0.2, 0.3]);
        let mut full = oracle(p.clone(), NoiseModel::Minibatch { batch: 40 }, 0);
        assert_eq!(full.sample_grad(&x).unwrap(), p.grad(&x));

        let mut single = oracle(p.clone(), NoiseModel::Minibatch { batch: 1 }, 0);
        let n = 40_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let g = single.sample_grad(&x).unwrap();
            for j in 0..3 {
                acc[j] += g[j];
            }
        }
        let truth = p.grad(&x);
        for j in 0..3 {
            assert!((acc[j] / n as f64 - truth[j]).abs() < 0.01);
        }

        let analytic: Arc<dyn Problem<f64>> = Arc::new(make_fraction_poly());
        let err = GradOracle::new(analytic, NoiseModel::Minibatch { batch: 1 }, Rng::new(0));
        assert!(matches!(err, Err(Error::UnsupportedNoise(_))));
        assert!(GradOracle::new(p, NoiseModel::Minibatch { batch: 41 }, Rng::new(0)).is_err());
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(GradOracle::new(quad(), NoiseModel::Gaussian { sigma: -1.0 }, Rng::new(0)).is_err());
        assert!(GradOracle::new(quad(), NoiseModel::Relaxed { a: -1.0, b: 0.0 }, Rng::new(0)).is_err());
        assert!(GradOracle::new(quad(), NoiseModel::BoundedCoord { sigma: v(&[1.0]) }, Rng::new(0)).is_err());
    }
}
