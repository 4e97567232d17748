//! Declarative experiment configuration.
//!
//! A config is a TOML document with `[problem]`, `[noise]`, `[optimizer]` and
//! `[run]` tables plus optional `[projection]` and `[diagnose]` tables. A list
//! in any scalar leaf turns the document into a grid; see [`expand_grid`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{Rng, Vector};
use crate::optimizers::{
    gsign_theory_hparams, AdaGradCoord, AdaGradGlobal, AdamConfig, AdamFamily, AdamVariant, ClipConfig, ClipSgd,
    GSignConfig, GeneralizedSignSgd, Optimizer, ProjectionSet, Schedule, Sgd, SgdConfig, Sgdol, SgdolConfig,
    SgdolCoord,
};
use crate::oracles::NoiseModel;
use crate::problems::{
    balance_and_bias, make_exp_branch, make_fraction_poly, make_pl_sin, make_quadratic, make_quartic_capped,
    make_robust_regression, parse_libsvm, precondition_quadratic, synth_classification, Problem,
};

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub optimizer: OptimizerSpec,
    pub run: RunSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnose: Option<DiagnoseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    FractionPoly {},
    PlSin {},
    Quadratic {
        h: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
        #[serde(default)]
        c: f64,
        /// Replace the problem by its unit-Hessian twin.
        #[serde(default)]
        precondition: bool,
    },
    ExpBranch { l0: f64, l1: f64 },
    QuarticCapped { eps: f64, l0: f64 },
    RobustRegression {
        /// LibSVM file; the majority class is subsampled and a bias column appended.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        synth: Option<SynthSpec>,
        /// Held-out fraction; the remaining rows define the training objective.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        validation_fraction: Option<f64>,
        #[serde(default)]
        data_seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    None {},
    Gaussian { sigma: f64 },
    Relaxed { a: f64, b: f64 },
    BoundedCoord { sigma: Vec<f64> },
    Minibatch { batch: usize },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::None {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Constant,
    InvT,
    InvSqrtT,
    Exponential,
    ExponentialBeta,
    Cosine,
}

/// Step-size schedule fields shared by SGD and the Adam family.
///
/// `decay` is the schedule's `α`; `horizon` defaults to the run length and
/// `beta` defaults to `L/μ` from the problem metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default)]
    pub kind: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self { kind: ScheduleKind::Constant, decay: None, beta: None, horizon: None }
    }
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn adam_alpha() -> f64 {
    1e-3
}
fn beta1_default() -> f64 {
    0.9
}
fn beta2_default() -> f64 {
    0.999
}
fn eps_default() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerSpec {
    Sgd {
        eta0: f64,
        #[serde(default)]
        schedule: ScheduleSpec,
        #[serde(default)]
        momentum: f64,
        #[serde(default)]
        weight_decay: f64,
        #[serde(default)]
        nesterov: bool,
    },
    Sgdol {
        #[serde(default = "ten")]
        alpha: f64,
        /// Assumed smoothness; defaults to the problem's known constant.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l: Option<f64>,
    },
    SgdolCoord {
        #[serde(default = "ten")]
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l: Option<f64>,
    },
    Adam {
        #[serde(default = "adam_alpha")]
        alpha: f64,
        #[serde(default = "beta1_default")]
        beta1: f64,
        #[serde(default = "beta2_default")]
        beta2: f64,
        #[serde(default = "eps_default")]
        eps: f64,
        #[serde(default)]
        lambda: f64,
        variant: AdamVariant,
        /// Base of the multiplier schedule `η_t`.
        #[serde(default = "one")]
        eta0: f64,
        #[serde(default)]
        schedule: ScheduleSpec,
    },
    Gsign {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta1: Option<f64>,
        #[serde(default)]
        beta2: f64,
        /// Upper bound on `F(x0) − F*`; when set, `eta` and `beta1` follow
        /// the theory prescription from the problem's `L0` and the noise bounds.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    Clip {
        eta: f64,
        gamma: f64,
        #[serde(default)]
        momentum: bool,
        #[serde(default = "beta1_default")]
        beta1: f64,
    },
    AdagradGlobal {
        /// Defaults to the projection's diameter.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diameter: Option<f64>,
    },
    AdagradCoord { eta: f64 },
}

fn seeds_default() -> Vec<u64> {
    (0..5).collect()
}
fn record_every_default() -> u64 {
    1
}
fn tail_frac_default() -> f64 {
    0.1
}
fn converge_tol_default() -> f64 {
    1e-8
}
fn grid_cap_default() -> usize {
    DEFAULT_GRID_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub iters: u64,
    #[serde(default = "seeds_default")]
    pub seeds: Vec<u64>,
    #[serde(default = "record_every_default")]
    pub record_every: u64,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Fraction of the run averaged for tail statistics.
    #[serde(default = "tail_frac_default")]
    pub tail_frac: f64,
    /// A run counts as converged when its tail mean `‖∇F‖²` is at most this.
    #[serde(default = "converge_tol_default")]
    pub converge_tol: f64,
    #[serde(default = "grid_cap_default")]
    pub grid_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjectionSpec {
    Hypercube { center: Vec<f64>, halfwidth: f64 },
    L2Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSpec {
    /// Per-coordinate gradient scales for the scale-freeness audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    /// `[lo, hi, points]` grid of a one-dimensional problem for the PL audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<(f64, f64, usize)>,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Keys whose value is a vector, not a grid axis, when given a flat list.
const VECTOR_KEYS: [&str; 7] = ["problem.h", "problem.b", "run.x0", "run.seeds", "projection.center", "diagnose.scales", "diagnose.grid"];

fn is_vector_key(path: &str, root: &toml::Table) -> bool {
    if VECTOR_KEYS.contains(&path) {
        return true;
    }
    // A flat sigma list is a vector only for bounded coordinate noise.
    path == "noise.sigma"
        && root
            .get("noise")
            .and_then(|n| n.get("kind"))
            .and_then(|k| k.as_str())
            .is_some_and(|k| k == "bounded_coord")
}

/// One grid axis: a dotted key path and its candidate values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub path: String,
    pub values: Vec<toml::Value>,
}

fn collect_axes(table: &toml::Table, prefix: &str, root: &toml::Table, out: &mut Vec<GridAxis>) {
    for (key, value) in table {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match value {
            toml::Value::Table(t) => collect_axes(t, &path, root, out),
            toml::Value::Array(items) => {
                let nested = items.iter().all(|v| v.is_array()) && !items.is_empty();
                if !is_vector_key(&path, root) || nested {
                    out.push(GridAxis { path, values: items.clone() });
                }
            }
            _ => {}
        }
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) {
    let mut parts = path.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return;
        }
        cur = cur.get_mut(part).and_then(|v| v.as_table_mut()).expect("axis path exists");
    }
}

/// A parsed document: grid axes plus the configs at every grid point.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    /// Configs in row-major order over `axes` (last axis fastest), with the
    /// axis value indices that produced them.
    pub points: Vec<(Vec<usize>, ExperimentConfig)>,
}

pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(config_err)
}

fn typed(table: toml::Table) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::Value::Table(table).try_into().map_err(config_err)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Expands every list-valued leaf into a grid axis and builds the cartesian
/// product, refusing grids larger than `run.grid_cap`.
pub fn expand_grid(table: &toml::Table) -> Result<GridSpec> {
    let mut axes = Vec::new();
    collect_axes(table, "", table, &mut axes);
    if let Some(empty) = axes.iter().find(|a| a.values.is_empty()) {
        return Err(Error::Config(format!("grid axis {} has no values", empty.path)));
    }
    let cap = table
        .get("run")
        .and_then(|r| r.get("grid_cap"))
        .and_then(|c| c.as_integer())
        .map_or(DEFAULT_GRID_CAP, |c| c.max(0) as usize);
    let size = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
    match size {
        Some(n) if n <= cap => {}
        _ => {
            return Err(Error::Config(format!("grid has more than {cap} points")));
        }
    }
    let total = size.unwrap_or(0);
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut idx = vec![0; axes.len()];
        let mut rem = flat;
        for (k, axis) in axes.iter().enumerate().rev() {
            idx[k] = rem % axis.values.len();
            rem /= axis.values.len();
        }
        let mut t = table.clone();
        for (axis, &i) in axes.iter().zip(&idx) {
            set_path(&mut t, &axis.path, axis.values[i].clone());
        }
        points.push((idx, typed(t)?));
    }
    Ok(GridSpec { axes, points })
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let grid = expand_grid(&parse_table(text)?)?;
        if grid.points.len() != 1 {
            return Err(Error::Config(format!(
                "expected a single configuration, found a grid of {} points (use grid mode)",
                grid.points.len()
            )));
        }
        Ok(grid.points.into_iter().next().expect("one point").1)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if r.iters < 1 {
            return Err(Error::Config("run.iters must be >= 1".into()));
        }
        if r.seeds.is_empty() {
            return Err(Error::Config("run.seeds must be non-empty".into()));
        }
        let mut sorted = r.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != r.seeds.len() {
            return Err(Error::Config("run.seeds must be distinct".into()));
        }
        if r.record_every < 1 || r.record_every > r.iters {
            return Err(Error::Config(format!("run.record_every must lie in [1, iters], got {}", r.record_every)));
        }
        if !(r.tail_frac > 0.0 && r.tail_frac <= 1.0) {
            return Err(Error::Config(format!("run.tail_frac must lie in (0, 1], got {}", r.tail_frac)));
        }
        if r.x0.is_empty() || r.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("run.x0 must be a non-empty finite vector".into()));
        }
        Ok(())
    }

    /// Canonical JSON of the config; field order is fixed by the type.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Stable 16-hex-digit hash of the canonical config.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    /// Base step size used for tie-breaking in grid rankings.
    pub fn eta0(&self) -> f64 {
        match &self.optimizer {
            OptimizerSpec::Sgd { eta0, .. } | OptimizerSpec::Adam { eta0, .. } => *eta0,
            OptimizerSpec::Clip { eta, .. } | OptimizerSpec::AdagradCoord { eta } => *eta,
            OptimizerSpec::Gsign { eta, .. } => eta.unwrap_or(f64::INFINITY),
            OptimizerSpec::Sgdol { l, .. } | OptimizerSpec::SgdolCoord { l, .. } => l.map_or(f64::INFINITY, |l| 1.0 / l),
            OptimizerSpec::AdagradGlobal { diameter } => diameter.unwrap_or(f64::INFINITY),
        }
    }

    /// Optimizer hyperparameters as `key=value` pairs joined by `;`.
    pub fn hyperparameters(&self) -> String {
        let json = serde_json::to_value(&self.optimizer).expect("optimizer serializes");
        let mut parts = Vec::new();
        flatten_json("", &json, &mut parts);
        parts.join(";")
    }
}

fn flatten_json(prefix: &str, v: &serde_json::Value, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, val, out);
            }
        }
        other => out.push(format!("{prefix}={other}")),
    }
}

/// Objective built from a config, with an optional held-out twin.
#[derive(Clone)]
pub struct BuiltProblem {
    pub train: Arc<dyn Problem<f64>>,
    pub validation: Option<Arc<dyn Problem<f64>>>,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<BuiltProblem> {
        let only = |p: Arc<dyn Problem<f64>>| BuiltProblem { train: p, validation: None };
        Ok(match self {
            ProblemSpec::FractionPoly {} => only(Arc::new(make_fraction_poly())),
            ProblemSpec::PlSin {} => only(Arc::new(make_pl_sin())),
            ProblemSpec::Quadratic { h, b, c, precondition } => {
                let h = Vector::from_slice(h).map_err(|e| Error::InvalidProblem(e.to_string()))?;
                let b = match b {
                    Some(b) => Vector::from_slice(b).map_err(|e| Error::InvalidProblem(e.to_string()))?,
                    None => Vector::zeros(h.len()),
                };
                let q = make_quadratic(h, b, *c)?;
                if *precondition {
                    only(Arc::new(precondition_quadratic(&q)))
                } else {
                    only(Arc::new(q))
                }
            }
            ProblemSpec::ExpBranch { l0, l1 } => only(Arc::new(make_exp_branch(*l0, *l1)?)),
            ProblemSpec::QuarticCapped { eps, l0 } => only(Arc::new(make_quartic_capped(*eps, *l0)?)),
            ProblemSpec::RobustRegression { dataset, synth, validation_fraction, data_seed } => {
                let mut rng = Rng::new(*data_seed);
                let data = match (dataset, synth) {
                    (Some(path), None) => {
                        let file = std::fs::File::open(path)?;
                        let raw = parse_libsvm::<f64, _>(std::io::BufReader::new(file))?;
                        balance_and_bias(&raw, &mut rng)?
                    }
                    (None, Some(s)) => synth_classification(s.n, s.d, s.noise, &mut rng)?,
                    _ => {
                        return Err(Error::InvalidProblem(
                            "robust_regression needs exactly one of `dataset` or `synth`".into(),
                        ))
                    }
                };
                match validation_fraction {
                    None => only(Arc::new(make_robust_regression(data)?)),
                    Some(frac) => {
                        if !(*frac > 0.0 && *frac < 1.0) {
                            return Err(Error::InvalidProblem(format!("validation_fraction must lie in (0, 1), got {frac}")));
                        }
                        let (train, val) = data.split_indices(*frac, &mut rng);
                        if train.is_empty() || val.is_empty() {
                            return Err(Error::InvalidProblem("validation split leaves an empty side".into()));
                        }
                        BuiltProblem {
                            train: Arc::new(make_robust_regression(data.select(&train))?),
                            validation: Some(Arc::new(make_robust_regression(data.select(&val))?)),
                        }
                    }
                }
            }
        })
    }
}

impl NoiseSpec {
    pub fn model(&self) -> Result<NoiseModel<f64>> {
        Ok(match self {
            NoiseSpec::None {} => NoiseModel::None,
            NoiseSpec::Gaussian { sigma } => NoiseModel::Gaussian { sigma: *sigma },
            NoiseSpec::Relaxed { a, b } => NoiseModel::Relaxed { a: *a, b: *b },
            NoiseSpec::BoundedCoord { sigma } => NoiseModel::BoundedCoord {
                sigma: Vector::from_slice(sigma).map_err(|e| Error::UnsupportedNoise(e.to_string()))?,
            },
            NoiseSpec::Minibatch { batch } => NoiseModel::Minibatch { batch: *batch },
        })
    }
}

impl ProjectionSpec {
    pub fn build(&self) -> Result<ProjectionSet<f64>> {
        match self {
            ProjectionSpec::Hypercube { center, halfwidth } => {
                ProjectionSet::hypercube(Vector::from_slice(center)?, *halfwidth)
            }
            ProjectionSpec::L2Ball { center, radius } => ProjectionSet::l2_ball(Vector::from_slice(center)?, *radius),
        }
    }
}

impl ScheduleSpec {
    pub fn build(&self, eta0: f64, iters: u64, problem: &dyn Problem<f64>) -> Result<Schedule<f64>> {
        let horizon = self.horizon.unwrap_or(iters);
        let decay = |name: &str| {
            self.decay.ok_or_else(|| Error::Config(format!("schedule `{name}` needs `decay`")))
        };
        let s = match self.kind {
            ScheduleKind::Constant => Schedule::Constant { eta0 },
            ScheduleKind::InvT => Schedule::InvT { eta0, alpha: decay("inv_t")? },
            ScheduleKind::InvSqrtT => Schedule::InvSqrtT { eta0, alpha: decay("inv_sqrt_t")? },
            ScheduleKind::Exponential => Schedule::Exponential { eta0, alpha: decay("exponential")? },
            ScheduleKind::ExponentialBeta => {
                let beta = match self.beta {
                    Some(b) => b,
                    None => {
                        let m = problem.meta();
                        match (m.smooth_l, m.mu_pl) {
                            (Some(l), Some(mu)) => l / mu,
                            _ => {
                                return Err(Error::Config(
                                    "exponential_beta needs `beta` when the problem has no known L and mu".into(),
                                ))
                            }
                        }
                    }
                };
                Schedule::ExponentialBeta { eta0, beta, horizon }
            }
            ScheduleKind::Cosine => Schedule::Cosine { eta0, horizon },
        };
        s.validate()?;
        Ok(s)
    }
}

impl ExperimentConfig {
    /// Fresh optimizer at `x0` for this config.
    pub fn build_optimizer(&self, problem: &dyn Problem<f64>) -> Result<Box<dyn Optimizer<f64>>> {
        let x0 = Vector::from_slice(&self.run.x0)?;
        if x0.len() != problem.dim() {
            return Err(Error::Config(format!("run.x0 has dimension {}, problem has {}", x0.len(), problem.dim())));
        }
        let projection = self.projection.as_ref().map(|p| p.build()).transpose()?;
        let iters = self.run.iters;
        let no_projection = |name: &str| -> Result<()> {
            if projection.is_some() {
                Err(Error::Config(format!("optimizer `{name}` does not support a projection")))
            } else {
                Ok(())
            }
        };
        let smooth_l = |l: &Option<f64>| {
            l.or(problem.meta().smooth_l)
                .ok_or_else(|| Error::Config("sgdol needs `l` when the problem has no known smoothness".into()))
        };
        Ok(match &self.optimizer {
            OptimizerSpec::Sgd { eta0, schedule, momentum, weight_decay, nesterov } => {
                let cfg = SgdConfig {
                    schedule: schedule.build(*eta0, iters, problem)?,
                    momentum: *momentum,
                    weight_decay: *weight_decay,
                    nesterov: *nesterov,
                    projection: projection.unwrap_or_default(),
                };
                Box::new(Sgd::new(x0, cfg)?)
            }
            OptimizerSpec::Sgdol { alpha, l } => {
                no_projection("sgdol")?;
                Box::new(Sgdol::new(x0, SgdolConfig { alpha: *alpha, l: smooth_l(l)? })?)
            }
            OptimizerSpec::SgdolCoord { alpha, l } => {
                no_projection("sgdol_coord")?;
                Box::new(SgdolCoord::new(x0, SgdolConfig { alpha: *alpha, l: smooth_l(l)? })?)
            }
            OptimizerSpec::Adam { alpha, beta1, beta2, eps, lambda, variant, eta0, schedule } => {
                no_projection("adam")?;
                let cfg = AdamConfig {
                    alpha: *alpha,
                    beta1: *beta1,
                    beta2: *beta2,
                    eps: *eps,
                    lambda: *lambda,
                    variant: *variant,
                    schedule: schedule.build(*eta0, iters, problem)?,
                };
                Box::new(AdamFamily::new(x0, cfg)?)
            }
            OptimizerSpec::Gsign { eta, beta1, beta2, delta } => {
                no_projection("gsign")?;
                let (eta, beta1) = match (delta, eta, beta1) {
                    (Some(delta), None, None) => {
                        let l0 = problem
                            .meta()
                            .l0
                            .clone()
                            .ok_or_else(|| Error::Config("gsign theory step needs a problem with known L0".into()))?;
                        let sigma = match self.noise.model()? {
                            NoiseModel::None => Vector::zeros(problem.dim()),
                            NoiseModel::BoundedCoord { sigma } => sigma,
                            _ => {
                                return Err(Error::Config(
                                    "gsign theory step needs `none` or `bounded_coord` noise".into(),
                                ))
                            }
                        };
                        let h = gsign_theory_hparams(*delta, &l0, &sigma, iters, *beta2)?;
                        (h.eta, h.beta1)
                    }
                    (None, Some(eta), Some(beta1)) => (*eta, *beta1),
                    _ => return Err(Error::Config("gsign needs either `delta` or both `eta` and `beta1`".into())),
                };
                Box::new(GeneralizedSignSgd::new(x0, GSignConfig { eta, beta1, beta2: *beta2 })?)
            }
            OptimizerSpec::Clip { eta, gamma, momentum, beta1 } => {
                no_projection("clip")?;
                Box::new(ClipSgd::new(x0, ClipConfig { eta: *eta, gamma: *gamma, momentum: *momentum, beta1: *beta1 })?)
            }
            OptimizerSpec::AdagradGlobal { diameter } => {
                let domain = projection.unwrap_or_default();
                let d = diameter
                    .or_else(|| domain.diameter())
                    .ok_or_else(|| Error::Config("adagrad_global needs `diameter` or a bounded projection".into()))?;
                Box::new(AdaGradGlobal::new(x0, d, domain)?)
            }
            OptimizerSpec::AdagradCoord { eta } => Box::new(AdaGradCoord::new(x0, *eta, projection.unwrap_or_default())?),
        })
    }
}
