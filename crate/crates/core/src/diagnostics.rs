//! Measurement procedures run on problems and recorded trajectories.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Rng, Vector};
use crate::optimizers::Optimizer;
use crate::oracles::{GradOracle, NoiseModel};
use crate::problems::Problem;
use crate::Scalar;

/// Interior fractions of the segment at which the gradient is probed.
const SEGMENT_FRACTIONS: [f64; 5] = [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0, 5.0 / 6.0];

/// Coordinate moves at or below this are skipped by the per-coordinate probe.
const MIN_COORD_MOVE: f64 = 1e-12;

/// Points with `F − F*` at or below this are skipped by the PL audit.
const PL_GAP_FLOOR: f64 = 1e-12;

/// Quantile of residuals the (L0, L1) fit is shifted to cover.
const ENVELOPE_QUANTILE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessSample {
    pub t: u64,
    pub l_hat: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordL0L1Point {
    pub j: usize,
    /// `min(|∂ⱼF(x_t)|, |∂ⱼF(x_{t+1})|)`.
    pub g_min: f64,
    /// `|∂ⱼF(x_{t+1}) − ∂ⱼF(x_t)| / |x_{t+1,j} − x_{t,j}|`.
    pub ratio: f64,
}

/// Local smoothness along a segment: the largest gradient-difference quotient
/// at the interior fractions `1/6, …, 5/6`.
pub fn estimate_smoothness_along<T: Scalar, P: Problem<T> + ?Sized>(
    p: &P,
    x_from: &Vector<T>,
    x_to: &Vector<T>,
) -> Result<f64> {
    x_from.check_dim(x_to)?;
    let d = x_to.sub(x_from);
    let d_norm = d.norm_l2().as_f64();
    if d_norm == 0.0 {
        return Err(Error::DegenerateSegment);
    }
    let g0 = p.grad(x_from);
    let mut best = 0.0f64;
    for &gamma in &SEGMENT_FRACTIONS {
        let mut x = x_from.clone();
        x.axpy(T::of(gamma), &d);
        let diff = p.grad(&x).sub(&g0).norm_l2().as_f64();
        best = best.max(diff / (gamma * d_norm));
    }
    Ok(best)
}

/// Smoothness estimates between consecutive iterates of a trajectory.
pub fn smoothness_along_trajectory<T: Scalar, P: Problem<T> + ?Sized>(
    p: &P,
    traj: &[Vector<T>],
) -> Result<Vec<SmoothnessSample>> {
    let mut out = Vec::new();
    for (t, pair) in traj.windows(2).enumerate() {
        if pair[0] == pair[1] {
            continue;
        }
        let l_hat = estimate_smoothness_along(p, &pair[0], &pair[1])?;
        let grad_norm = p.grad(&pair[0]).norm_l2().as_f64();
        out.push(SmoothnessSample { t: t as u64, l_hat, grad_norm });
    }
    Ok(out)
}

/// Per-coordinate gradient-change quotients between consecutive iterates.
///
/// The quotient divides by the coordinate's own displacement `|Δxⱼ|`, not by
/// `‖Δx‖₂`; coordinates that moved by at most `1e−12` are skipped.
pub fn coord_l0l1_scatter<T: Scalar, P: Problem<T> + ?Sized>(p: &P, traj: &[Vector<T>]) -> Vec<CoordL0L1Point> {
    let grads: Vec<Vector<T>> = traj.iter().map(|x| p.grad(x)).collect();
    let mut out = Vec::new();
    for t in 1..traj.len() {
        for j in 0..traj[t].len() {
            let dx = (traj[t][j] - traj[t - 1][j]).abs().as_f64();
            if dx <= MIN_COORD_MOVE {
                continue;
            }
            let (a, b) = (grads[t - 1][j].as_f64(), grads[t][j].as_f64());
            out.push(CoordL0L1Point { j, g_min: a.abs().min(b.abs()), ratio: (b - a).abs() / dx });
        }
    }
    out
}

/// Upper-envelope fit `ratio ≲ l0 + l1·g_min`.
///
/// Ordinary least squares, then `l0` is raised so that at least 99% of the
/// points lie on or below the line. Both values are clamped at zero. When all
/// `g_min` coincide the fit degenerates to `(max ratio, 0)`.
pub fn fit_l0l1(points: &[CoordL0L1Point]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Empty(format!("(L0, L1) fit needs at least 2 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.g_min).sum::<f64>() / n;
    let my = points.iter().map(|p| p.ratio).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.g_min - mx).powi(2)).sum();
    if sxx == 0.0 {
        let max = points.iter().fold(0.0f64, |m, p| m.max(p.ratio));
        return Ok((max, 0.0));
    }
    let sxy: f64 = points.iter().map(|p| (p.g_min - mx) * (p.ratio - my)).sum();
    let l1 = (sxy / sxx).max(0.0);
    let l0 = my - l1 * mx;
    let mut residuals: Vec<f64> = points.iter().map(|p| p.ratio - (l0 + l1 * p.g_min)).collect();
    residuals.sort_by(f64::total_cmp);
    let k = ((ENVELOPE_QUANTILE * n).ceil() as usize).clamp(1, residuals.len()) - 1;
    let shift = residuals[k].max(0.0);
    Ok(((l0 + shift).max(0.0), l1))
}

/// `min ½‖∇F(x)‖² / (F(x) − F*)` over the points that are not already optimal.
///
/// Returns `+∞` when every point is within `1e−12` of `F*`.
pub fn pl_audit<T: Scalar, P: Problem<T> + ?Sized>(p: &P, xs: &[Vector<T>]) -> Result<f64> {
    let f_star = p.meta().f_star.ok_or(Error::MissingMeta("f_star"))?.as_f64();
    let mut min_ratio = f64::INFINITY;
    for x in xs {
        let gap = p.eval(x).as_f64() - f_star;
        if gap <= PL_GAP_FLOOR {
            continue;
        }
        let half_sq = 0.5 * p.grad(x).norm_sq().as_f64();
        min_ratio = min_ratio.min(half_sq / (gap + 1e-300));
    }
    Ok(min_ratio)
}

/// Builds a fresh optimizer from a starting point.
pub type OptimizerFactory<'a, T> = dyn Fn(Vector<T>) -> Result<Box<dyn Optimizer<T>>> + 'a;

/// Runs the optimizer twice from `x0` with identically seeded oracles, once on
/// raw gradients and once with every gradient multiplied coordinate-wise by
/// `scales`, and returns the largest iterate deviation `max_{t,j} |x_{t,j} − x'_{t,j}|`.
pub fn scale_free_audit<T: Scalar>(
    make: &OptimizerFactory<'_, T>,
    problem: Arc<dyn Problem<T>>,
    noise: NoiseModel<T>,
    x0: &Vector<T>,
    scales: &Vector<T>,
    horizon: u64,
    seed: u64,
) -> Result<f64> {
    x0.check_dim(scales)?;
    if scales.iter().any(|&s| !(s > T::zero())) {
        return Err(Error::InvalidParameter("scale-free audit needs positive scales".into()));
    }
    let mut raw = make(x0.clone())?;
    let mut scaled = make(x0.clone())?;
    let mut raw_oracle = GradOracle::new(problem.clone(), noise.clone(), Rng::new(seed))?;
    let mut scaled_oracle = GradOracle::new(problem, noise, Rng::new(seed))?;
    let mut worst = 0.0f64;
    for _ in 0..horizon {
        let g = raw_oracle.draw(raw.x(), raw.grads_per_step())?;
        raw.step(&g)?;
        let g: Vec<_> = scaled_oracle
            .draw(scaled.x(), scaled.grads_per_step())?
            .iter()
            .map(|gi| gi.hadamard(scales))
            .collect();
        scaled.step(&g)?;
        let dev = raw.x().dist_linf(scaled.x()).as_f64();
        if !dev.is_finite() {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Smallest dyadic exponent with its own bin; everything at or below `2^−27`
/// shares the leftmost bin.
pub const HISTOGRAM_MIN_EXP: i32 = -27;
/// Number of bins: one underflow bin, 27 dyadic bins covering `(2^−27, 1)` and
/// one bin for values `≥ 1`.
pub const HISTOGRAM_BINS: usize = 29;

/// Counts of `|u|` in dyadic bins.
///
/// Bin 0 holds `|u| ≤ 2^−27`; bin `i ∈ 1..=27` holds `[2^{i−28}, 2^{i−27})`
/// (open at `2^−27` on the left); bin 28 holds `|u| ≥ 1` and NaN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: [u64; HISTOGRAM_BINS],
}

impl Default for Histogram {
    fn default() -> Self {
        Self { counts: [0; HISTOGRAM_BINS] }
    }
}

impl Histogram {
    pub fn bin_of(u: f64) -> usize {
        let a = u.abs();
        if a.is_nan() || a >= 1.0 {
            return HISTOGRAM_BINS - 1;
        }
        if a <= 2f64.powi(HISTOGRAM_MIN_EXP) {
            return 0;
        }
        // Normal numbers in (2^-27, 1): the biased exponent is exact.
        let exp = ((a.to_bits() >> 52) & 0x7ff) as i32 - 1023;
        (exp - HISTOGRAM_MIN_EXP + 1) as usize
    }

    pub fn add(&mut self, u: f64) {
        self.counts[Self::bin_of(u)] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(lower, upper)` edges per bin as powers of two; the outer bins are
    /// unbounded on one side.
    pub fn bin_edges() -> Vec<(f64, f64)> {
        let mut edges = vec![(0.0, 2f64.powi(HISTOGRAM_MIN_EXP))];
        for k in HISTOGRAM_MIN_EXP..0 {
            edges.push((2f64.powi(k), 2f64.powi(k + 1)));
        }
        edges.push((1.0, f64::INFINITY));
        edges
    }
}

pub fn update_histogram(updates: impl IntoIterator<Item = f64>) -> Histogram {
    let mut h = Histogram::default();
    for u in updates {
        h.add(u);
    }
    h
}

/// Mean of the last `⌈tail_frac · len⌉` entries.
pub fn noise_floor(values: &[f64], tail_frac: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("noise floor of an empty trajectory".into()));
    }
    if !(tail_frac > 0.0 && tail_frac <= 1.0) {
        return Err(Error::InvalidParameter(format!("tail_frac must lie in (0, 1], got {tail_frac}")));
    }
    let k = ((tail_frac * values.len() as f64).ceil() as usize).clamp(1, values.len());
    Ok(values[values.len() - k..].iter().sum::<f64>() / k as f64)
}
