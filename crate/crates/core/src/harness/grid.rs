//! Exhaustive grid search over list-valued config leaves.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::config::{ExperimentConfig, GridSpec};
use super::run::{run_experiment, RunResult, SummaryRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Metric {
    /// Mean final objective (held-out objective when a split is configured).
    #[default]
    #[value(name = "final_loss")]
    FinalLoss,
    /// Mean tail `‖∇F‖²`.
    #[value(name = "tail_grad")]
    TailGrad,
}

impl Metric {
    pub fn value(self, s: &SummaryRow) -> f64 {
        match self {
            Metric::FinalLoss => s.val_f.map_or(s.final_f.mean, |v| v.mean),
            Metric::TailGrad => s.tail_grad.mean,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    /// Results in ranked order, best first.
    pub ranked: Vec<RunResult>,
    /// Expand-grid warnings for axes whose best value lies on an edge.
    pub warnings: Vec<String>,
}

impl GridOutcome {
    pub fn best(&self) -> &RunResult {
        &self.ranked[0]
    }
}

fn failed(s: &SummaryRow, metric: Metric) -> bool {
    s.diverged > 0 || !metric.value(s).is_finite()
}

/// Diverged runs last, then by metric, smaller base step size, fingerprint.
pub fn rank_order(a: &RunResult, b: &RunResult, metric: Metric) -> Ordering {
    let (sa, sb) = (&a.summary, &b.summary);
    failed(sa, metric)
        .cmp(&failed(sb, metric))
        .then_with(|| {
            if failed(sa, metric) {
                Ordering::Equal
            } else {
                metric.value(sa).total_cmp(&metric.value(sb))
            }
        })
        .then_with(|| a.config.eta0().total_cmp(&b.config.eta0()))
        .then_with(|| sa.fingerprint.cmp(&sb.fingerprint))
}

pub fn grid_search(grid: &GridSpec, metric: Metric) -> Result<GridOutcome> {
    if grid.points.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let results: Vec<RunResult> = grid.points.par_iter().map(|(_, cfg)| run_experiment(cfg)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&i, &j| rank_order(&results[i], &results[j], metric));
    let best_idx = &grid.points[order[0]].0;
    let mut warnings = Vec::new();
    for (axis, &chosen) in grid.axes.iter().zip(best_idx) {
        if axis.values.len() < 2 {
            continue;
        }
        let nums: Option<Vec<f64>> = axis
            .values
            .iter()
            .map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
            .collect();
        let Some(nums) = nums else { continue };
        let v = nums[chosen];
        let lo = nums.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if v == lo || v == hi {
            warnings.push(format!(
                "best {} = {} lies on the grid edge [{}, {}]; extend the grid",
                axis.path, axis.values[chosen], lo, hi
            ));
        }
    }
    let mut slots: Vec<Option<RunResult>> = results.into_iter().map(Some).collect();
    let ranked = order.iter().map(|&i| slots[i].take().expect("each result once")).collect();
    Ok(GridOutcome { ranked, warnings })
}

/// The best configuration, ready to be written back as TOML.
pub fn best_config(outcome: &GridOutcome) -> &ExperimentConfig {
    &outcome.best().config
}
