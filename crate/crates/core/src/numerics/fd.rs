use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::problems::Problem;
use crate::Scalar;

/// Step `h = scale * (1 + ‖x‖∞)`.
pub fn relative_step<T: Scalar>(x: &Vector<T>, scale: T) -> T {
    scale * (T::one() + x.norm_linf())
}

/// Central-difference gradient of an arbitrary objective.
pub fn finite_diff_grad_fn<T, F>(f: F, x: &Vector<T>, h: T) -> Result<Vector<T>>
where
    T: Scalar,
    F: Fn(&Vector<T>) -> T,
{
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    let two_h = h + h;
    let mut probe = x.clone();
    let mut out = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let xj = x[j];
        probe[j] = xj + h;
        let fp = f(&probe);
        probe[j] = xj - h;
        let fm = f(&probe);
        probe[j] = xj;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!("objective evaluation near coordinate {j}")));
        }
        out.push((fp - fm) / two_h);
    }
    Ok(Vector::from_raw(out))
}

/// Central-difference gradient of `p` at `x`.
pub fn finite_diff_grad<T, P>(p: &P, x: &Vector<T>, h: T) -> Result<Vector<T>>
where
    T: Scalar,
    P: Problem<T> + ?Sized,
{
    finite_diff_grad_fn(|y| p.eval(y), x, h)
}
