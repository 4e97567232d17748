use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::problems::{Dataset, Problem, ProblemMeta};
use crate::Scalar;

/// `φ(θ) = θ² / (1 + θ²)`: non-convex, 1-Lipschitz and 2-smooth.
#[inline]
pub fn phi<T: Scalar>(theta: T) -> T {
    let s = theta * theta;
    s / (T::one() + s)
}

#[inline]
pub fn phi_prime<T: Scalar>(theta: T) -> T {
    let q = T::one() + theta * theta;
    (theta + theta) / (q * q)
}

/// Finite-sum objective `(1/m) Σ φ(aᵢᵀx − yᵢ)`.
#[derive(Debug, Clone)]
pub struct RobustRegression<T> {
    data: Dataset<T>,
    meta: ProblemMeta<T>,
}

pub fn make_robust_regression<T: Scalar>(data: Dataset<T>) -> Result<RobustRegression<T>> {
    if data.rows() == 0 || data.cols() == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    if data.labels().len() != data.rows() {
        return Err(Error::Dimension { expected: data.rows(), got: data.labels().len() });
    }
    let mean_row_sq = (0..data.rows())
        .map(|i| data.row(i).iter().map(|&a| a * a).sum::<T>())
        .sum::<T>()
        / T::of(data.rows() as f64);
    let meta = ProblemMeta { smooth_l: Some(T::of(2.0) * mean_row_sq), ..Default::default() };
    Ok(RobustRegression { data, meta })
}

impl<T: Scalar> RobustRegression<T> {
    pub fn dataset(&self) -> &Dataset<T> {
        &self.data
    }

    #[inline]
    fn residual(&self, x: &Vector<T>, i: usize) -> T {
        let row = self.data.row(i);
        let mut acc = T::zero();
        for (a, &xi) in row.iter().zip(x.as_slice()) {
            acc += *a * xi;
        }
        acc - self.data.labels()[i]
    }

    fn accumulate_component(&self, x: &Vector<T>, i: usize, weight: T, out: &mut [T]) {
        let c = weight * phi_prime(self.residual(x, i));
        for (o, &a) in out.iter_mut().zip(self.data.row(i)) {
            *o += c * a;
        }
    }

    /// Mean of the component gradients over `indices`.
    pub fn batch_grad(&self, x: &Vector<T>, indices: &[usize]) -> Vector<T> {
        let mut out = vec![T::zero(); self.dim()];
        for &i in indices {
            self.accumulate_component(x, i, T::one(), &mut out);
        }
        let inv = T::one() / T::of(indices.len() as f64);
        for o in &mut out {
            *o *= inv;
        }
        Vector::from_raw(out)
    }
}

impl<T: Scalar> Problem<T> for RobustRegression<T> {
    fn name(&self) -> &str {
        "robust_regression"
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn eval(&self, x: &Vector<T>) -> T {
        let m = self.data.rows();
        (0..m).map(|i| phi(self.residual(x, i))).sum::<T>() / T::of(m as f64)
    }

    fn grad(&self, x: &Vector<T>) -> Vector<T> {
        let all: Vec<usize> = (0..self.data.rows()).collect();
        self.batch_grad(x, &all)
    }

    fn component_count(&self) -> usize {
        self.data.rows()
    }

    fn component_grad(&self, x: &Vector<T>, index: usize) -> Vector<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.accumulate_component(x, index, T::one(), &mut out);
        Vector::from_raw(out)
    }

    fn meta(&self) -> &ProblemMeta<T> {
        &self.meta
    }
}
