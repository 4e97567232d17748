use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Step-size schedule `η_t`, indexed from `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule<T> {
    Constant { eta0: T },
    /// `η0 / (1 + α t)`
    InvT { eta0: T, alpha: T },
    /// `η0 / (1 + α √t)`
    InvSqrtT { eta0: T, alpha: T },
    /// `η0 αᵗ`
    Exponential { eta0: T, alpha: T },
    /// `η0 αᵗ` with `α = (β / T)^{1/T}`.
    ExponentialBeta { eta0: T, beta: T, horizon: u64 },
    /// `η0 / 2 · (1 + cos(tπ / T))`
    Cosine { eta0: T, horizon: u64 },
}

impl<T: Scalar> Schedule<T> {
    pub fn constant(eta0: T) -> Self {
        Schedule::Constant { eta0 }
    }

    pub fn eta0(&self) -> T {
        match *self {
            Schedule::Constant { eta0 }
            | Schedule::InvT { eta0, .. }
            | Schedule::InvSqrtT { eta0, .. }
            | Schedule::Exponential { eta0, .. }
            | Schedule::ExponentialBeta { eta0, .. }
            | Schedule::Cosine { eta0, .. } => eta0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.eta0() > T::zero()) {
            return bad(format!("schedule eta0 must be > 0, got {}", self.eta0()));
        }
        match *self {
            Schedule::InvT { alpha, .. } | Schedule::InvSqrtT { alpha, .. } if alpha < T::zero() => {
                bad(format!("polynomial decay alpha must be >= 0, got {alpha}"))
            }
            Schedule::Exponential { alpha, .. } if !(alpha > T::zero() && alpha < T::one()) => {
                bad(format!("exponential alpha must lie in (0, 1), got {alpha}"))
            }
            Schedule::ExponentialBeta { beta, horizon, .. } => {
                if horizon < 1 || !(beta > T::zero()) || beta >= T::of(horizon as f64) {
                    bad(format!("exponential_beta needs 0 < beta < T (beta={beta}, T={horizon})"))
                } else {
                    Ok(())
                }
            }
            Schedule::Cosine { horizon, .. } if horizon < 1 => bad("cosine horizon must be >= 1".into()),
            _ => Ok(()),
        }
    }

    /// Decay factor of an exponential schedule (after any β conversion).
    pub fn exponential_alpha(&self) -> Option<T> {
        match *self {
            Schedule::Exponential { alpha, .. } => Some(alpha),
            Schedule::ExponentialBeta { beta, horizon, .. } => {
                let t = T::of(horizon as f64);
                Some((beta / t).powf(T::one() / t))
            }
            _ => None,
        }
    }

    pub fn eval(&self, t: u64) -> Result<T> {
        if t < 1 {
            return Err(Error::OutOfRange("schedules are indexed from t = 1".into()));
        }
        let tf = T::of(t as f64);
        Ok(match *self {
            Schedule::Constant { eta0 } => eta0,
            Schedule::InvT { eta0, alpha } => eta0 / (T::one() + alpha * tf),
            Schedule::InvSqrtT { eta0, alpha } => eta0 / (T::one() + alpha * tf.sqrt()),
            Schedule::Exponential { eta0, .. } | Schedule::ExponentialBeta { eta0, .. } => {
                let alpha = self.exponential_alpha().expect("exponential schedule");
                eta0 * alpha.powf(tf)
            }
            Schedule::Cosine { eta0, horizon } => {
                if t > horizon {
                    return Err(Error::OutOfRange(format!("cosine schedule queried at t={t} > T={horizon}")));
                }
                let phase = tf * T::of(std::f64::consts::PI) / T::of(horizon as f64);
                // Clamp rounding at t = T so emitted values stay non-negative.
                (eta0 / T::of(2.0) * (T::one() + phase.cos())).max(T::zero())
            }
        })
    }
}

/// `Σ_{t=1}^{T} cos(tπ/T)`.
pub fn cosine_sum(horizon: u64) -> f64 {
    (1..=horizon).map(|t| (t as f64 * std::f64::consts::PI / horizon as f64).cos()).sum()
}
