use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::Scalar;

/// Closed convex set with a cheap Euclidean projection.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ProjectionSet<T> {
    #[default]
    None,
    Hypercube { center: Vector<T>, halfwidth: T },
    L2Ball { center: Vector<T>, radius: T },
}

impl<T: Scalar> ProjectionSet<T> {
    pub fn hypercube(center: Vector<T>, halfwidth: T) -> Result<Self> {
        if !(halfwidth > T::zero()) {
            return Err(Error::InvalidParameter(format!("hypercube halfwidth must be > 0, got {halfwidth}")));
        }
        Ok(Self::Hypercube { center, halfwidth })
    }

    pub fn l2_ball(center: Vector<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self::L2Ball { center, radius })
    }

    /// Euclidean diameter, `None` for the unconstrained set.
    pub fn diameter(&self) -> Option<T> {
        match self {
            Self::None => None,
            Self::Hypercube { center, halfwidth } => Some(T::of(2.0) * *halfwidth * T::of(center.len() as f64).sqrt()),
            Self::L2Ball { radius, .. } => Some(T::of(2.0) * *radius),
        }
    }

    /// Membership up to a relative rounding slack of `1e−12`.
    pub fn contains(&self, x: &Vector<T>) -> bool {
        let slack = T::one() + T::of(1e-12);
        match self {
            Self::None => true,
            Self::Hypercube { center, halfwidth } => x.dist_linf(center) <= *halfwidth * slack,
            Self::L2Ball { center, radius } => x.sub(center).norm_l2() <= *radius * slack,
        }
    }

    /// `argmin_{y ∈ set} ‖y − x‖₂`.
    pub fn project(&self, x: &Vector<T>) -> Vector<T> {
        match self {
            Self::None => x.clone(),
            Self::Hypercube { center, halfwidth } => {
                x.zip_map(center, |xi, ci| xi.max(ci - *halfwidth).min(ci + *halfwidth))
            }
            Self::L2Ball { center, radius } => {
                let offset = x.sub(center);
                let dist = offset.norm_l2();
                if dist <= *radius {
                    x.clone()
                } else {
                    let mut y = center.clone();
                    y.axpy(*radius / dist, &offset);
                    y
                }
            }
        }
    }
}

/// Projection onto `set`.
pub fn project<T: Scalar>(set: &ProjectionSet<T>, x: &Vector<T>) -> Vector<T> {
    set.project(x)
}
