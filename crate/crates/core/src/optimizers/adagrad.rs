use super::{check_grads, require, IterateAverage, Optimizer, ProjectionSet, StepInfo};
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::problems::Problem;
use crate::Scalar;

/// AdaGrad with one global step size `η_t = D/√(2 Q_t)`, `Q_t = Σ‖g_s‖²`,
/// followed by projection. Does not move while `Q_t = 0`.
#[derive(Debug, Clone)]
pub struct AdaGradGlobal<T> {
    x: Vector<T>,
    t: u64,
    q: T,
    diameter: T,
    domain: ProjectionSet<T>,
    avg: IterateAverage<T>,
}

impl<T: Scalar> AdaGradGlobal<T> {
    pub fn new(x0: Vector<T>, diameter: T, domain: ProjectionSet<T>) -> Result<Self> {
        require(diameter > T::zero(), || format!("adagrad diameter must be > 0, got {diameter}"))?;
        x0.ensure_finite("x0")?;
        let x = domain.project(&x0);
        let avg = IterateAverage::new(x.len());
        Ok(Self { x, t: 0, q: T::zero(), diameter, domain, avg })
    }

    pub fn accumulated(&self) -> T {
        self.q
    }

    /// Mean of the iterates at which gradients were taken.
    pub fn average(&self) -> Option<Vector<T>> {
        self.avg.mean()
    }
}

impl<T: Scalar> Optimizer<T> for AdaGradGlobal<T> {
    fn name(&self) -> &'static str {
        "adagrad_global"
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 1)?;
        self.avg.push(&self.x);
        let g = &grads[0];
        self.q += g.norm_sq();
        let eta = if self.q > T::zero() { self.diameter / (T::of(2.0) * self.q).sqrt() } else { T::zero() };
        let mut next = self.x.clone();
        next.axpy(-eta, g);
        let next = self.domain.project(&next);
        let info = StepInfo::uniform(eta, &self.x, &next);
        self.x = next;
        self.t += 1;
        Ok(info)
    }
}

/// Coordinate-wise AdaGrad `η_{t,j} = η/√(Σ g_{s,j}²)` with projection,
/// normally onto a hypercube.
#[derive(Debug, Clone)]
pub struct AdaGradCoord<T> {
    x: Vector<T>,
    t: u64,
    sums: Vector<T>,
    eta: T,
    domain: ProjectionSet<T>,
    avg: IterateAverage<T>,
}

impl<T: Scalar> AdaGradCoord<T> {
    pub fn new(x0: Vector<T>, eta: T, domain: ProjectionSet<T>) -> Result<Self> {
        require(eta > T::zero(), || format!("adagrad eta must be > 0, got {eta}"))?;
        x0.ensure_finite("x0")?;
        let x = domain.project(&x0);
        let d = x.len();
        Ok(Self { x, t: 0, sums: Vector::zeros(d), eta, domain, avg: IterateAverage::new(d) })
    }

    pub fn current_etas(&self) -> Vector<T> {
        self.sums.map(|s| if s > T::zero() { self.eta / s.sqrt() } else { T::zero() })
    }

    pub fn average(&self) -> Option<Vector<T>> {
        self.avg.mean()
    }
}

impl<T: Scalar> Optimizer<T> for AdaGradCoord<T> {
    fn name(&self) -> &'static str {
        "adagrad_coord"
    }

    fn x(&self) -> &Vector<T> {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.t
    }

    fn step(&mut self, grads: &[Vector<T>]) -> Result<StepInfo<T>> {
        check_grads(&self.x, grads, 1)?;
        self.avg.push(&self.x);
        let g = &grads[0];
        self.sums = self.sums.zip_map(g, |s, gi| s + gi * gi);
        let etas = self.current_etas();
        let next = self.domain.project(&self.x.zip_map(&etas.hadamard(g), |xi, u| xi - u));
        let info = StepInfo::per_coordinate(etas.as_slice(), &self.x, &next);
        self.x = next;
        self.t += 1;
        Ok(info)
    }
}

/// Inner iterations per restart round, `⌈32 d L / μ⌉`.
pub fn restart_inner_iterations(dim: usize, l: f64, mu: f64) -> Result<u64> {
    if !(l > 0.0 && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("restart needs L > 0 and mu > 0, got L={l}, mu={mu}")));
    }
    Ok((32.0 * dim as f64 * l / mu).ceil() as u64)
}

/// Runs `rounds` restarts of coordinate-wise AdaGrad and returns the averaged
/// output of every round, starting with `x0`.
///
/// Round `i` searches the hypercube of halfwidth `D∞/2^{i−1}` around the
/// previous average with `η = (D∞/√2)/2^{i−1}`.
pub fn adagrad_restart_trace<T: Scalar>(
    mut grad: impl FnMut(&Vector<T>) -> Result<Vector<T>>,
    x0: &Vector<T>,
    d_inf: T,
    inner: u64,
    rounds: usize,
) -> Result<Vec<Vector<T>>> {
    require(rounds >= 1, || "restart rounds must be >= 1".into())?;
    require(inner >= 1, || "restart inner iterations must be >= 1".into())?;
    require(d_inf > T::zero(), || format!("d_inf must be > 0, got {d_inf}"))?;
    let mut trace = vec![x0.clone()];
    let mut center = x0.clone();
    let mut width = d_inf;
    for _ in 0..rounds {
        let cube = ProjectionSet::hypercube(center.clone(), width)?;
        let mut opt = AdaGradCoord::new(center.clone(), width / T::of(2.0).sqrt(), cube)?;
        for _ in 0..inner {
            let g = grad(opt.x())?;
            opt.step(&[g])?;
        }
        center = opt.average().expect("at least one inner step");
        trace.push(center.clone());
        width = width / T::of(2.0);
    }
    Ok(trace)
}

/// Restarted AdaGrad on a strongly convex problem with exact gradients.
pub fn adagrad_restart_run<T: Scalar, P: Problem<T> + ?Sized>(
    p: &P,
    x0: &Vector<T>,
    d_inf: T,
    mu: T,
    l: T,
    rounds: usize,
) -> Result<Vector<T>> {
    let inner = restart_inner_iterations(p.dim(), l.as_f64(), mu.as_f64())?;
    let trace = adagrad_restart_trace(|x| Ok(p.grad(x)), x0, d_inf, inner, rounds)?;
    Ok(trace.into_iter().last().expect("non-empty trace"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_quadratic, Problem};

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_slice(xs).unwrap()
    }

    #[test]
    fn global_step_sizes() {
        let d = 2f64.sqrt();
        let mut o = AdaGradGlobal::new(v(&[0.0, 0.0]), d, ProjectionSet::None).unwrap();
        let info = o.step(&[v(&[0.6, 0.8])]).unwrap();
        assert!((info.step_mean - 1.0).abs() < 1e-15);
        let info = o.step(&[v(&[0.6, 0.8])]).unwrap();
        assert!((info.step_mean - d / 2.0).abs() < 1e-15);
    }

    #[test]
    fn global_freezes_without_gradient() {
        let mut o = AdaGradGlobal::new(v(&[1.0]), 1.0, ProjectionSet::None).unwrap();
        for _ in 0..10 {
            o.step(&[v(&[0.0])]).unwrap();
        }
        assert_eq!(o.x()[0], 1.0);
        assert_eq!(o.accumulated(), 0.0);
    }

    #[test]
    fn global_average_bound() {
        // F(x̄) − F* ≤ √2 D/T · √(Σ‖∇F(x_t)‖²) on a bounded domain.
        let p = make_quadratic(v(&[1.0, 10.0]), v(&[-1.0, 3.0]), 0.0).unwrap();
        let cube = ProjectionSet::hypercube(v(&[0.0, 0.0]), 2.0).unwrap();
        let d = cube.diameter().unwrap();
        let mut o = AdaGradGlobal::new(v(&[2.0, 2.0]), d, cube).unwrap();
        let mut sum_sq = 0.0;
        let t = 500;
        for _ in 0..t {
            let g = p.grad(o.x());
            sum_sq += g.norm_sq();
            o.step(&[g]).unwrap();
        }
        let gap = p.eval(&o.average().unwrap()) - p.meta().f_star.unwrap();
        assert!(gap <= 2f64.sqrt() * d / t as f64 * sum_sq.sqrt() + 1e-12);
    }

    #[test]
    fn coord_first_step_is_sign() {
        let mut o = AdaGradCoord::new(v(&[0.0, 0.0, 0.0]), 0.3, ProjectionSet::None).unwrap();
        o.step(&[v(&[5.0, -1e-3, 0.0])]).unwrap();
        assert_eq!(o.x(), &v(&[-0.3, 0.3, 0.0]));
    }

    #[test]
    fn coord_constant_gradient_decay() {
        let mut o = AdaGradCoord::new(v(&[0.0]), 1.0, ProjectionSet::None).unwrap();
        for t in 1..=50 {
            o.step(&[v(&[1.0])]).unwrap();
            assert!((o.current_etas()[0] - 1.0 / (t as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn coord_projects_independently() {
        let cube = ProjectionSet::hypercube(v(&[0.0, 0.0]), 1.0).unwrap();
        let mut o = AdaGradCoord::new(v(&[0.9, 0.0]), 1.0, cube).unwrap();
        o.step(&[v(&[-1.0, 0.5])]).unwrap();
        assert_eq!(o.x(), &v(&[1.0, -1.0]));
    }

    #[test]
    fn restart_inner_count() {
        assert_eq!(restart_inner_iterations(2, 4.0, 1.0).unwrap(), 256);
        assert_eq!(restart_inner_iterations(3, 1.0, 7.0).unwrap(), 14);
        assert!(restart_inner_iterations(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn restart_halves_sup_distance_each_round() {
        let p = make_quadratic(v(&[1.0, 4.0]), v(&[-0.3, 0.8]), 0.0).unwrap();
        let star = p.meta().minimizer.clone().unwrap();
        let x0 = star.add(&v(&[0.9, -1.0]));
        let trace = adagrad_restart_trace(|x| Ok(p.grad(x)), &x0, 1.0, 256, 6).unwrap();
        for (i, xi) in trace.iter().enumerate() {
            let err = xi.dist_linf(&star).powi(2);
            assert!(err <= 1.0 / 4f64.powi(i as i32), "round {i}: {err}");
        }
        let out = adagrad_restart_run(&p, &x0, 1.0, 1.0, 4.0, 6).unwrap();
        assert_eq!(&out, trace.last().unwrap());
        assert!(adagrad_restart_run(&p, &x0, 1.0, 1.0, 4.0, 0).is_err());
    }
}
