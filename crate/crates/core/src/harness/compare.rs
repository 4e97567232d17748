//! Side-by-side runs of several optimizers on one problem.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{parse_table, ExperimentConfig};
use super::run::{optimizer_label, run_experiment, RunResult};
use super::svg::Series;
use crate::error::{Error, Result};

/// Parses a document whose `[[optimizers]]` array replaces `[optimizer]`.
/// Each entry may carry a `label`.
pub fn parse_compare(text: &str) -> Result<Vec<(String, ExperimentConfig)>> {
    let mut base = parse_table(text)?;
    let entries = match base.remove("optimizers") {
        Some(toml::Value::Array(a)) if !a.is_empty() => a,
        _ => return Err(Error::Config("compare needs a non-empty [[optimizers]] array".into())),
    };
    if base.contains_key("optimizer") {
        return Err(Error::Config("compare takes [[optimizers]], not [optimizer]".into()));
    }
    let mut out: Vec<(String, ExperimentConfig)> = Vec::new();
    for entry in entries {
        let mut entry = entry.as_table().cloned().ok_or_else(|| Error::Config("[[optimizers]] entries must be tables".into()))?;
        let label = match entry.remove("label") {
            Some(toml::Value::String(s)) => Some(s),
            Some(_) => return Err(Error::Config("optimizer label must be a string".into())),
            None => None,
        };
        let mut t = base.clone();
        t.insert("optimizer".into(), toml::Value::Table(entry));
        let cfg = ExperimentConfig::from_toml_str(&toml::to_string(&t).map_err(|e| Error::Config(e.to_string()))?)?;
        let mut label = label.unwrap_or_else(|| optimizer_label(&cfg));
        if out.iter().any(|(l, _)| *l == label) {
            label = format!("{label}_{}", out.len());
        }
        out.push((label, cfg));
    }
    Ok(out)
}

fn check_shared(cfgs: &[(String, ExperimentConfig)]) -> Result<()> {
    let (_, first) = cfgs.first().ok_or_else(|| Error::Config("nothing to compare".into()))?;
    for (label, c) in &cfgs[1..] {
        let same = c.problem == first.problem
            && c.noise == first.noise
            && c.run.seeds == first.run.seeds
            && c.run.iters == first.run.iters
            && c.run.record_every == first.run.record_every
            && c.run.x0 == first.run.x0
            && c.run.master_seed == first.run.master_seed;
        if !same {
            return Err(Error::Config(format!("`{label}` does not share problem, noise, seeds and horizon")));
        }
    }
    Ok(())
}

pub fn compare(cfgs: &[(String, ExperimentConfig)]) -> Result<Vec<(String, RunResult)>> {
    check_shared(cfgs)?;
    cfgs.par_iter()
        .map(|(label, cfg)| {
            let mut r = run_experiment(cfg)?;
            r.summary.label = label.clone();
            Ok((label.clone(), r))
        })
        .collect()
}

/// Seed-averaged value per recorded iteration; `+∞` when any seed diverged.
pub fn mean_curve(r: &RunResult, pick: impl Fn(&super::run::TrajectoryRecord) -> f64) -> Vec<(u64, f64)> {
    let mut by_iter: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for rec in r.records() {
        by_iter.entry(rec.iter).or_default().push(pick(&rec));
    }
    let n = r.seeds.len();
    by_iter
        .into_iter()
        .map(|(it, vals)| {
            let mean = if vals.len() == n { vals.iter().sum::<f64>() / n as f64 } else { f64::INFINITY };
            (it, mean)
        })
        .collect()
}

/// `‖∇F‖²` curves, one series per optimizer.
pub fn grad_series(results: &[(String, RunResult)]) -> Vec<Series> {
    results
        .iter()
        .map(|(label, r)| Series {
            label: label.clone(),
            points: mean_curve(r, |rec| rec.grad_norm_sq).into_iter().map(|(i, v)| (i as f64, v)).collect(),
        })
        .collect()
}

pub fn compare_csv(results: &[(String, RunResult)]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(["label", "iter", "f_val_mean", "grad_norm_sq_mean", "step_mean_mean"]).map_err(io)?;
    for (label, r) in results {
        let f = mean_curve(r, |rec| rec.f_val);
        let g = mean_curve(r, |rec| rec.grad_norm_sq);
        let s = mean_curve(r, |rec| rec.step_mean);
        for ((it, fv), ((_, gv), (_, sv))) in f.iter().zip(g.iter().zip(&s)) {
            w.write_record([
                label.clone(),
                it.to_string(),
                super::io::fmt_f64(*fv),
                super::io::fmt_f64(*gv),
                super::io::fmt_f64(*sv),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}
