use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::problems::{Problem, ProblemMeta};
use crate::Scalar;

fn scalar_meta<T: Scalar>(f_star: T) -> ProblemMeta<T> {
    ProblemMeta { f_star: Some(f_star), minimizer: Some(Vector::zeros(1)), ..Default::default() }
}

/// `F(x) = x² / (1 + x²)`, 2-smooth, not PL globally.
#[derive(Debug, Clone)]
pub struct FractionPoly<T> {
    meta: ProblemMeta<T>,
}

pub fn make_fraction_poly<T: Scalar>() -> FractionPoly<T> {
    let mut meta = scalar_meta(T::zero());
    meta.smooth_l = Some(T::of(2.0));
    FractionPoly { meta }
}

impl<T: Scalar> Problem<T> for FractionPoly<T> {
    fn name(&self) -> &str {
        "fraction_poly"
    }

    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector<T>) -> T {
        let s = x[0] * x[0];
        s / (T::one() + s)
    }

    fn grad(&self, x: &Vector<T>) -> Vector<T> {
        let v = x[0];
        let q = T::one() + v * v;
        Vector::from_raw(vec![(v + v) / (q * q)])
    }

    fn meta(&self) -> &ProblemMeta<T> {
        &self.meta
    }
}

/// `F(x) = x² + 3 sin²(x)`: non-convex, PL with μ = 1/10, 8-smooth.
#[derive(Debug, Clone)]
pub struct PlSin<T> {
    meta: ProblemMeta<T>,
}

pub fn make_pl_sin<T: Scalar>() -> PlSin<T> {
    let mut meta = scalar_meta(T::zero());
    meta.mu_pl = Some(T::of(0.1));
    meta.smooth_l = Some(T::of(8.0));
    PlSin { meta }
}

impl<T: Scalar> Problem<T> for PlSin<T> {
    fn name(&self) -> &str {
        "pl_sin"
    }

    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector<T>) -> T {
        let s = x[0].sin();
        x[0] * x[0] + T::of(3.0) * s * s
    }

    fn grad(&self, x: &Vector<T>) -> Vector<T> {
        let v = x[0];
        Vector::from_raw(vec![v + v + T::of(3.0) * (v + v).sin()])
    }

    fn meta(&self) -> &ProblemMeta<T> {
        &self.meta
    }
}

/// Diagonal quadratic `½ xᵀHx + bᵀx + c`, stored in centred form
/// `½ Σ hⱼ (xⱼ − x*ⱼ)² + F*` so gradients are `H(x − x*)`.
#[derive(Debug, Clone)]
pub struct Quadratic<T> {
    h: Vector<T>,
    b: Vector<T>,
    c: T,
    meta: ProblemMeta<T>,
}

pub fn make_quadratic<T: Scalar>(h_diag: Vector<T>, b: Vector<T>, c: T) -> Result<Quadratic<T>> {
    h_diag.check_dim(&b)?;
    if let Some(j) = h_diag.iter().position(|&hj| !(hj > T::zero())) {
        return Err(Error::InvalidProblem(format!("Hessian diagonal entry {j} is {} (must be > 0)", h_diag[j])));
    }
    let minimizer = b.zip_map(&h_diag, |bj, hj| -bj / hj);
    let f_star = c - T::of(0.5) * b.iter().zip(h_diag.iter()).map(|(&bj, &hj)| bj * bj / hj).sum::<T>();
    Ok(Quadratic::assemble(h_diag, b, c, minimizer, f_star))
}

/// The identity-Hessian twin `½ xᵀx + (H⁻¹b)ᵀx + c̃` of a diagonal quadratic.
///
/// Gradients satisfy `∇F̃(x) = H⁻¹ ∇F(x)`. The constant `c̃` is chosen so the
/// twin keeps the original minimum value.
pub fn precondition_quadratic<T: Scalar>(p: &Quadratic<T>) -> Quadratic<T> {
    let d = p.h.len();
    let b_tilde = p.b.zip_map(&p.h, |bj, hj| bj / hj);
    let minimizer = p.meta.minimizer.clone().expect("quadratic minimizer");
    let f_star = p.meta.f_star.expect("quadratic f_star");
    let c_tilde = f_star + T::of(0.5) * minimizer.norm_sq();
    Quadratic::assemble(Vector::filled(d, T::one()), b_tilde, c_tilde, minimizer, f_star)
}

impl<T: Scalar> Quadratic<T> {
    fn assemble(h: Vector<T>, b: Vector<T>, c: T, minimizer: Vector<T>, f_star: T) -> Self {
        let hmax = h.iter().fold(T::zero(), |m, &v| m.max(v));
        let hmin = h.iter().fold(T::infinity(), |m, &v| m.min(v));
        let meta = ProblemMeta {
            f_star: Some(f_star),
            minimizer: Some(minimizer),
            mu_pl: Some(hmin),
            smooth_l: Some(hmax),
            l0: Some(h.clone()),
            l1: Some(Vector::zeros(h.len())),
            ..Default::default()
        };
        Self { h, b, c, meta }
    }

    pub fn hessian_diag(&self) -> &Vector<T> {
        &self.h
    }

    pub fn linear_term(&self) -> &Vector<T> {
        &self.b
    }

    pub fn constant(&self) -> T {
        self.c
    }

    pub fn minimizer(&self) -> &Vector<T> {
        self.meta.minimizer.as_ref().expect("quadratic minimizer")
    }

    pub fn condition_number(&self) -> T {
        self.meta.smooth_l.unwrap() / self.meta.mu_pl.unwrap()
    }
}

impl<T: Scalar> Problem<T> for Quadratic<T> {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.h.len()
    }

    fn eval(&self, x: &Vector<T>) -> T {
        let m = self.minimizer();
        let half = T::of(0.5);
        let quad: T = (0..x.len()).map(|j| {
            let r = x[j] - m[j];
            self.h[j] * r * r
        })
        .sum();
        half * quad + self.meta.f_star.unwrap()
    }

    fn grad(&self, x: &Vector<T>) -> Vector<T> {
        let m = self.minimizer();
        Vector::from_raw((0..x.len()).map(|j| self.h[j] * (x[j] - m[j])).collect())
    }

    fn meta(&self) -> &ProblemMeta<T> {
        &self.meta
    }
}

/// Exponential-branch function on which constant-step GD with a large step
/// diverges; `(L0, L1)`-smooth and twice differentiable.
#[derive(Debug, Clone)]
pub struct ExpBranch<T> {
    l0: T,
    l1: T,
    meta: ProblemMeta<T>,
}

pub fn make_exp_branch<T: Scalar>(l0: T, l1: T) -> Result<ExpBranch<T>> {
    if !(l0 > T::zero() && l1 > T::zero()) {
        return Err(Error::InvalidProblem(format!("exp_branch needs L0, L1 > 0 (got {l0}, {l1})")));
    }
    let mut meta = scalar_meta(l0 / (T::of(2.0) * l1 * l1));
    meta.l0 = Some(Vector::filled(1, l0));
    meta.l1 = Some(Vector::filled(1, l1));
    Ok(ExpBranch { l0, l1, meta })
}

impl<T: Scalar> ExpBranch<T> {
    pub fn knot(&self) -> T {
        T::one() / self.l1
    }

    /// Starting point `(ln(M L1 / L0) + 1) / L1` at which `F'(x0) = M`.
    pub fn start_for_grad_bound(&self, m: T) -> T {
        ((m * self.l1 / self.l0).ln() + T::one()) / self.l1
    }

    /// Step-size threshold `2 (ln(M L1 / L0) + 1) / (M L1)` above which GD diverges.
    pub fn divergence_threshold(&self, m: T) -> T {
        T::of(2.0) * ((m * self.l1 / self.l0).ln() + T::one()) / (m * self.l1)
    }
}

impl<T: Scalar> Problem<T> for ExpBranch<T> {
    fn name(&self) -> &str {
        "exp_branch"
    }

    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector<T>) -> T {
        let (l0, l1, v) = (self.l0, self.l1, x[0]);
        let k = self.knot();
        if v < -k {
            l0 * (-l1 * v - T::one()).exp() / (l1 * l1)
        } else if v > k {
            l0 * (l1 * v - T::one()).exp() / (l1 * l1)
        } else {
            l0 * v * v / T::of(2.0) + l0 / (T::of(2.0) * l1 * l1)
        }
    }

    fn grad(&self, x: &Vector<T>) -> Vector<T> {
        let (l0, l1, v) = (self.l0, self.l1, x[0]);
        let k = self.knot();
        let g = if v < -k {
            -l0 * (-l1 * v - T::one()).exp() / l1
        } else if v > k {
            l0 * (l1 * v - T::one()).exp() / l1
        } else {
            l0 * v
        };
        Vector::from_raw(vec![g])
    }

    fn meta(&self) -> &ProblemMeta<T> {
        &self.meta
    }
}

/// Quartic-capped function whose gradient never exceeds `ε`; GD with a small
/// step crawls along its linear branches.
#[derive(Debug, Clone)]
pub struct QuarticCapped<T> {
    eps: T,
    l0: T,
    meta: ProblemMeta<T>,
}

pub fn make_quartic_capped<T: Scalar>(eps: T, l0: T) -> Result<QuarticCapped<T>> {
    if !(eps > T::zero() && l0 > T::zero()) {
        return Err(Error::InvalidProblem(format!("quartic_capped needs eps, L0 > 0 (got {eps}, {l0})")));
    }
    let mut meta = scalar_meta(T::of(9.0) * eps * eps / (T::of(16.0) * l0));
    meta.l0 = Some(Vector::filled(1, l0));
    meta.l1 = Some(Vector::zeros(1));
    meta.grad_bound_m = Some(Vector::filled(1, eps));
    Ok(QuarticCapped { eps, l0, meta })
}

impl<T: Scalar> QuarticCapped<T> {
    pub fn knot(&self) -> T {
        T::of(3.0) * self.eps / (T::of(2.0) * self.l0)
    }

    pub fn eps(&self) -> T {
        self.eps
    }
}

impl<T: Scalar> Problem<T> for QuarticCapped<T> {
    fn name(&self) -> &str {
        "quartic_capped"
    }

    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector<T>) -> T {
        let (eps, l0, v) = (self.eps, self.l0, x[0]);
        let k = self.knot();
        if v < -k {
            -eps * v
        } else if v > k {
            eps * v
        } else {
            let v2 = v * v;
            l0 / T::of(2.0) * v2 - l0 * l0 * l0 * v2 * v2 / (T::of(27.0) * eps * eps)
                + T::of(9.0) * eps * eps / (T::of(16.0) * l0)
        }
    }

    fn grad(&self, x: &Vector<T>) -> Vector<T> {
        let (eps, l0, v) = (self.eps, self.l0, x[0]);
        let k = self.knot();
        let g = if v < -k {
            -eps
        } else if v > k {
            eps
        } else {
            l0 * v - T::of(4.0) * l0 * l0 * l0 * v * v * v / (T::of(27.0) * eps * eps)
        };
        Vector::from_raw(vec![g])
    }

    fn meta(&self) -> &ProblemMeta<T> {
        &self.meta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_grad, Rng};

    fn x1(v: f64) -> Vector<f64> {
        Vector::from_slice(&[v]).unwrap()
    }

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_slice(xs).unwrap()
    }

    fn second_derivative(p: &dyn Problem<f64>, x: f64) -> f64 {
        let h = 1e-5 * (1.0 + x.abs());
        (p.grad(&x1(x + h))[0] - p.grad(&x1(x - h))[0]) / (2.0 * h)
    }

    #[test]
    fn fraction_poly_values() {
        let p = make_fraction_poly::<f64>();
        assert_eq!(p.eval(&x1(0.0)), 0.0);
        assert_eq!(p.grad(&x1(1.0))[0], 0.5);
        assert_eq!(p.meta().smooth_l, Some(2.0));
    }

    #[test]
    fn fraction_poly_is_two_smooth() {
        let p = make_fraction_poly::<f64>();
        let mut worst: f64 = 0.0;
        for i in 0..=10_000 {
            let x = -5.0 + 10.0 * i as f64 / 10_000.0;
            worst = worst.max(second_derivative(&p, x).abs());
        }
        assert!(worst <= 2.0 + 1e-6, "max |F''| = {worst}");
    }

    #[test]
    fn pl_sin_values() {
        let p = make_pl_sin::<f64>();
        assert_eq!(p.eval(&x1(0.0)), 0.0);
        assert_eq!(p.grad(&x1(0.0))[0], 0.0);
        let g = p.grad(&x1(std::f64::consts::FRAC_PI_2))[0];
        assert!((g - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn pl_sin_satisfies_pl_with_tenth() {
        let p = make_pl_sin::<f64>();
        for i in 0..10_000 {
            let x = -10.0 + 20.0 * (i as f64 + 0.5) / 10_000.0;
            let g = p.grad(&x1(x))[0];
            let f = p.eval(&x1(x));
            assert!(0.5 * g * g / f >= 0.1, "PL violated at {x}");
        }
    }

    #[test]
    fn quadratic_basics() {
        let p = make_quadratic(v(&[1.0, 1.0]), v(&[0.0, 0.0]), 0.0).unwrap();
        assert_eq!(p.eval(&v(&[1.0, 1.0])), 1.0);
        let p = make_quadratic(v(&[1.0, 1e5]), v(&[0.0, 0.0]), 0.0).unwrap();
        assert_eq!(p.condition_number(), 1e5);
        let p = make_quadratic(v(&[2.0, 4.0]), v(&[2.0, -4.0]), 0.0).unwrap();
        assert_eq!(p.minimizer(), &v(&[-1.0, 1.0]));
        assert!(matches!(
            make_quadratic(v(&[1.0, 0.0]), v(&[0.0, 0.0]), 0.0),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn quadratic_matches_expanded_form() {
        let h = v(&[2.0, 4.0, 0.5]);
        let b = v(&[2.0, -4.0, 1.5]);
        let c = 0.75;
        let p = make_quadratic(h.clone(), b.clone(), c).unwrap();
        let mut rng = Rng::new(11);
        for _ in 0..100 {
            let x = v(&[rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)]);
            let expanded = 0.5 * (0..3).map(|j| h[j] * x[j] * x[j]).sum::<f64>()
                + (0..3).map(|j| b[j] * x[j]).sum::<f64>()
                + c;
            assert!((p.eval(&x) - expanded).abs() < 1e-10 * (1.0 + expanded.abs()));
            let g = p.grad(&x);
            for j in 0..3 {
                assert!((g[j] - (h[j] * x[j] + b[j])).abs() < 1e-12 * (1.0 + g[j].abs()));
            }
        }
    }

    #[test]
    fn preconditioned_twin() {
        let p = make_quadratic(v(&[1.0, 1.0]), v(&[0.5, -0.5]), 2.0).unwrap();
        let q = precondition_quadratic(&p);
        let x = v(&[0.3, -1.7]);
        assert_eq!(p.eval(&x), q.eval(&x));
        assert_eq!(p.grad(&x), q.grad(&x));

        let p = make_quadratic(v(&[2.0, 4.0]), v(&[2.0, -4.0]), 0.0).unwrap();
        let q = precondition_quadratic(&p);
        assert_eq!(q.minimizer(), &v(&[-1.0, 1.0]));
        assert_eq!(q.meta().f_star, p.meta().f_star);
        assert_eq!(q.condition_number(), 1.0);
        assert!(q.grad(q.minimizer()).norm_linf() == 0.0);

        let mut rng = Rng::new(3);
        for _ in 0..100 {
            let x = v(&[rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)]);
            let gp = p.grad(&x);
            let gq = q.grad(&x);
            for j in 0..2 {
                let scaled = gp[j] / p.hessian_diag()[j];
                assert!((gq[j] - scaled).abs() <= 1e-12 * (1.0 + scaled.abs()));
            }
        }
    }

    #[test]
    fn exp_branch_values_and_gluing() {
        let p = make_exp_branch(1.0, 1.0).unwrap();
        assert_eq!(p.eval(&x1(0.0)), 0.5);
        assert_eq!(p.meta().f_star, Some(0.5));
        let k = 1.0f64;
        let left = p.grad(&x1(k - 1e-12))[0];
        let right = p.grad(&x1(k + 1e-12))[0];
        assert!((left - 1.0).abs() < 1e-9 && (right - 1.0).abs() < 1e-9);

        let q = make_exp_branch(2.0, 0.5).unwrap();
        for knot in [-2.0, 2.0] {
            let gl = q.grad(&x1(knot - 1e-12))[0];
            let gr = q.grad(&x1(knot + 1e-12))[0];
            assert!((gl - gr).abs() <= 1e-9, "C1 gap {} at {knot}", (gl - gr).abs());
            let fl = q.eval(&x1(knot - 1e-12));
            let fr = q.eval(&x1(knot + 1e-12));
            assert!((fl - fr).abs() <= 1e-9);
        }
    }

    #[test]
    fn exp_branch_is_l0_l1_smooth() {
        let p = make_exp_branch(1.0, 1.0).unwrap();
        for i in 0..=2000 {
            let x = -10.0 + 20.0 * i as f64 / 2000.0;
            if (x.abs() - 1.0).abs() < 1e-3 {
                continue;
            }
            let f2 = second_derivative(&p, x).abs();
            let f1 = p.grad(&x1(x))[0].abs();
            assert!(f2 <= (1.0 + f1) * (1.0 + 1e-6), "x={x}: F''={f2}, F'={f1}");
        }
    }

    #[test]
    fn exp_branch_proof_constants() {
        let p = make_exp_branch(1.0, 1.0).unwrap();
        let m = std::f64::consts::E;
        assert!((p.start_for_grad_bound(m) - 2.0).abs() < 1e-15);
        assert!((p.divergence_threshold(m) - 4.0 / m).abs() < 1e-15);
        assert!((p.grad(&x1(2.0))[0] - m).abs() < 1e-14);
    }

    #[test]
    fn quartic_capped_branches() {
        let (eps, l0) = (0.3, 2.0);
        let p = make_quartic_capped(eps, l0).unwrap();
        let k = 3.0 * eps / (2.0 * l0);
        assert_eq!(p.grad(&x1(k + 0.1))[0], eps);
        assert_eq!(p.grad(&x1(-k - 0.1))[0], -eps);
        assert_eq!(p.grad(&x1(0.0))[0], 0.0);
        // middle-branch derivative at the knot: 3ε/2 − ε/2
        let mid = l0 * k - 4.0 * l0.powi(3) * k.powi(3) / (27.0 * eps * eps);
        assert!((mid - eps).abs() < 1e-15);
        for knot in [-k, k] {
            let gl = p.grad(&x1(knot - 1e-13))[0];
            let gr = p.grad(&x1(knot + 1e-13))[0];
            assert!((gl - gr).abs() <= 1e-9);
            assert!((p.eval(&x1(knot - 1e-13)) - p.eval(&x1(knot + 1e-13))).abs() <= 1e-9);
        }
        let mut x = -3.0;
        while x < 3.0 {
            assert!(p.grad(&x1(x))[0].abs() <= eps + 1e-15);
            assert!(p.eval(&x1(x)) >= p.meta().f_star.unwrap());
            x += 1e-3;
        }
    }

    #[test]
    fn minimizer_meta_consistency() {
        let problems: Vec<Box<dyn Problem<f64>>> = vec![
            Box::new(make_fraction_poly()),
            Box::new(make_pl_sin()),
            Box::new(make_quadratic(v(&[2.0, 4.0]), v(&[2.0, -4.0]), 1.0).unwrap()),
            Box::new(make_exp_branch(1.0, 1.0).unwrap()),
            Box::new(make_quartic_capped(0.1, 1.0).unwrap()),
        ];
        for p in &problems {
            let m = p.meta();
            let xstar = m.minimizer.as_ref().unwrap();
            assert!(p.grad(xstar).norm_linf() <= 1e-8, "{}", p.name());
            assert!((p.eval(xstar) - m.f_star.unwrap()).abs() <= 1e-10, "{}", p.name());
        }
    }

    #[test]
    fn grads_match_central_differences() {
        let problems: Vec<Box<dyn Problem<f64>>> = vec![
            Box::new(make_fraction_poly()),
            Box::new(make_pl_sin()),
            Box::new(make_exp_branch(1.0, 1.0).unwrap()),
            Box::new(make_quartic_capped(0.5, 1.0).unwrap()),
        ];
        let mut rng = Rng::new(77);
        for p in &problems {
            for _ in 0..100 {
                let x = x1(rng.uniform(-4.0, 4.0));
                let h = 1e-6 * (1.0 + x.norm_linf());
                let fd = finite_diff_grad(p.as_ref(), &x, h).unwrap();
                let g = p.grad(&x);
                let tol = (1e-5f64).max(1e-4 * g.norm_linf());
                assert!((fd[0] - g[0]).abs() <= tol, "{} at {}: {} vs {}", p.name(), x[0], fd[0], g[0]);
            }
        }
    }

    #[test]
    fn f32_instantiation() {
        let p = make_fraction_poly::<f32>();
        let g = p.grad(&Vector::from_slice(&[1.0f32]).unwrap());
        assert_eq!(g[0], 0.5f32);
    }
}
