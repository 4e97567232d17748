//! Multi-seed execution of one experiment configuration.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{BuiltProblem, ExperimentConfig};
use crate::error::{Error, Result};
use crate::numerics::{Rng, Vector};
use crate::optimizers::{Optimizer, StepInfo};
use crate::oracles::GradOracle;
use crate::problems::Problem;

/// One recorded iteration. `f_val` is `+∞` once a run diverged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub iter: u64,
    pub f_val: f64,
    /// Squared norm of the true (noiseless) gradient.
    pub grad_norm_sq: f64,
    pub step_min: f64,
    pub step_mean: f64,
    pub step_max: f64,
    pub update_linf: f64,
    pub oracle_calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
    pub diverged: bool,
    pub final_f: f64,
    /// Mean recorded `‖∇F‖²` over the tail of the run.
    pub tail_grad: f64,
    /// Mean recorded step size over the tail of the run.
    pub tail_step: f64,
    /// Final objective on the held-out split, if any.
    pub val_f: Option<f64>,
    pub wall_ms: f64,
}

/// Mean and 95% normal-approximation half-width over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub ci: f64,
}

impl MeanCi {
    /// `mean ± 1.96·sd/√n` with the sample standard deviation; a single
    /// value has zero width. Non-finite inputs give a non-finite mean.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 || !mean.is_finite() {
            return Self { mean, ci: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, ci: 1.96 * var.sqrt() / n.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub fingerprint: String,
    pub label: String,
    pub hyperparameters: String,
    pub seeds: usize,
    pub diverged: usize,
    pub converged: bool,
    pub final_f: MeanCi,
    pub tail_grad: MeanCi,
    pub tail_step: MeanCi,
    pub val_f: Option<MeanCi>,
    /// Total wall time over seeds; never written to the deterministic CSVs.
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    /// Sorted by seed.
    pub seeds: Vec<SeedResult>,
    pub summary: SummaryRow,
}

impl RunResult {
    /// All records ordered by `(seed, iter)`.
    pub fn records(&self) -> Vec<TrajectoryRecord> {
        self.seeds.iter().flat_map(|s| s.records.iter().copied()).collect()
    }
}

/// Per-seed stream: independent of the seed's position in the list.
pub fn seed_rng(master_seed: u64, seed: u64) -> Rng {
    Rng::derive(master_seed, seed)
}

/// Optimizer and oracle for one seed, stepped one iteration at a time.
pub struct Session {
    pub problem: Arc<dyn Problem<f64>>,
    pub oracle: GradOracle<f64>,
    pub optimizer: Box<dyn Optimizer<f64>>,
}

/// Outcome of one [`Session::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Moved(StepInfo<f64>),
    /// A gradient or iterate left the finite range.
    Diverged,
}

impl Session {
    pub fn new(cfg: &ExperimentConfig, problem: &BuiltProblem, seed: u64) -> Result<Self> {
        let optimizer = cfg.build_optimizer(problem.train.as_ref())?;
        let oracle = GradOracle::new(problem.train.clone(), cfg.noise.model()?, seed_rng(cfg.run.master_seed, seed))?;
        Ok(Self { problem: problem.train.clone(), oracle, optimizer })
    }

    pub fn x(&self) -> &Vector<f64> {
        self.optimizer.x()
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        let grads = match self.oracle.draw(self.optimizer.x(), self.optimizer.grads_per_step()) {
            Ok(g) => g,
            Err(Error::NonFinite(_)) => return Ok(StepOutcome::Diverged),
            Err(e) => return Err(e),
        };
        let info = match self.optimizer.step(&grads) {
            Ok(info) => info,
            Err(Error::NonFinite(_)) => return Ok(StepOutcome::Diverged),
            Err(e) => return Err(e),
        };
        if !self.optimizer.x().is_finite() {
            return Ok(StepOutcome::Diverged);
        }
        Ok(StepOutcome::Moved(info))
    }
}

fn nan_to_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn tail_mean(records: &[TrajectoryRecord], iters: u64, tail_frac: f64, pick: impl Fn(&TrajectoryRecord) -> f64) -> f64 {
    let start = iters - ((tail_frac * iters as f64).ceil() as u64).clamp(1, iters);
    let tail: Vec<f64> = records.iter().filter(|r| r.iter > start).map(pick).collect();
    if tail.is_empty() {
        return f64::INFINITY;
    }
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Runs one seed to completion or divergence.
pub fn run_seed(cfg: &ExperimentConfig, problem: &BuiltProblem, seed: u64) -> Result<SeedResult> {
    let start = Instant::now();
    let mut session = Session::new(cfg, problem, seed)?;
    let p = problem.train.clone();
    let x0 = session.x().clone();
    let mut records = vec![TrajectoryRecord {
        seed,
        iter: 0,
        f_val: nan_to_inf(p.eval(&x0)),
        grad_norm_sq: nan_to_inf(p.grad(&x0).norm_sq()),
        step_min: 0.0,
        step_mean: 0.0,
        step_max: 0.0,
        update_linf: 0.0,
        oracle_calls: 0,
    }];
    let iters = cfg.run.iters;
    let mut diverged = false;
    for t in 1..=iters {
        let outcome = session.step()?;
        let calls = session.oracle.calls();
        let info = match outcome {
            StepOutcome::Moved(info) => info,
            StepOutcome::Diverged => {
                records.push(TrajectoryRecord {
                    seed,
                    iter: t,
                    f_val: f64::INFINITY,
                    grad_norm_sq: f64::INFINITY,
                    step_min: f64::INFINITY,
                    step_mean: f64::INFINITY,
                    step_max: f64::INFINITY,
                    update_linf: f64::INFINITY,
                    oracle_calls: calls,
                });
                diverged = true;
                break;
            }
        };
        if t % cfg.run.record_every == 0 || t == iters {
            let x = session.x();
            let f = p.eval(x);
            let g = p.grad(x).norm_sq();
            let finite = f.is_finite() && g.is_finite();
            records.push(TrajectoryRecord {
                seed,
                iter: t,
                f_val: if finite { f } else { f64::INFINITY },
                grad_norm_sq: nan_to_inf(g),
                step_min: nan_to_inf(info.step_min),
                step_mean: nan_to_inf(info.step_mean),
                step_max: nan_to_inf(info.step_max),
                update_linf: nan_to_inf(info.update_linf),
                oracle_calls: calls,
            });
            if !finite {
                diverged = true;
                break;
            }
        }
    }
    let final_f = if diverged { f64::INFINITY } else { records.last().expect("records").f_val };
    let (tail_grad, tail_step) = if diverged {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (
            tail_mean(&records, iters, cfg.run.tail_frac, |r| r.grad_norm_sq),
            tail_mean(&records, iters, cfg.run.tail_frac, |r| r.step_mean),
        )
    };
    let val_f = problem.validation.as_ref().map(|v| if diverged { f64::INFINITY } else { nan_to_inf(v.eval(session.x())) });
    Ok(SeedResult {
        seed,
        records,
        diverged,
        final_f,
        tail_grad,
        tail_step,
        val_f,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Aggregates seed results (sorted by seed first, so the seed order in the
/// config does not matter).
pub fn summarize(cfg: &ExperimentConfig, label: &str, seeds: &mut [SeedResult]) -> SummaryRow {
    seeds.sort_by_key(|s| s.seed);
    let col = |f: &dyn Fn(&SeedResult) -> f64| seeds.iter().map(f).collect::<Vec<_>>();
    let tail_grad = MeanCi::of(&col(&|s| s.tail_grad));
    let diverged = seeds.iter().filter(|s| s.diverged).count();
    SummaryRow {
        fingerprint: cfg.fingerprint(),
        label: label.to_string(),
        hyperparameters: cfg.hyperparameters(),
        seeds: seeds.len(),
        diverged,
        converged: diverged == 0 && tail_grad.mean <= cfg.run.converge_tol,
        final_f: MeanCi::of(&col(&|s| s.final_f)),
        tail_grad,
        tail_step: MeanCi::of(&col(&|s| s.tail_step)),
        val_f: seeds
            .iter()
            .map(|s| s.val_f)
            .collect::<Option<Vec<_>>>()
            .map(|v| MeanCi::of(&v)),
        wall_ms: seeds.iter().map(|s| s.wall_ms).sum(),
    }
}

/// Display name for the optimizer of a config.
pub fn optimizer_label(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_value(&cfg.optimizer).expect("optimizer serializes");
    let kind = json.get("kind").and_then(|k| k.as_str()).unwrap_or("optimizer").to_string();
    match json.get("variant").and_then(|v| v.as_str()) {
        Some(v) => format!("{kind}_{v}"),
        None => kind,
    }
}

/// Runs every seed of `cfg`, in parallel across seeds.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let mut seeds: Vec<SeedResult> =
        cfg.run.seeds.par_iter().map(|&s| run_seed(cfg, &problem, s)).collect::<Result<_>>()?;
    let summary = summarize(cfg, &optimizer_label(cfg), &mut seeds);
    Ok(RunResult { config: cfg.clone(), seeds, summary })
}

/// Runs `f` on a pool sized by `ADAPTIX_THREADS` (default: all cores).
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var("ADAPTIX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
