//! Diagnostics driven by an experiment config.

use std::fmt::Write;
use std::path::Path;

use super::config::ExperimentConfig;
use super::io::{fmt_f64, write_atomic};
use super::run::{seed_rng, Session, StepOutcome};
use crate::diagnostics::{
    coord_l0l1_scatter, fit_l0l1, pl_audit, scale_free_audit, smoothness_along_trajectory, update_histogram,
    Histogram,
};
use crate::error::{Error, Result};
use crate::numerics::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DiagnoseKind {
    Smoothness,
    L0l1,
    Pl,
    Scalefree,
    Histogram,
}

/// Iterates `x_0, …` of the first seed, stopping early on divergence.
pub fn trajectory(cfg: &ExperimentConfig) -> Result<Vec<Vector<f64>>> {
    let problem = cfg.problem.build()?;
    let mut session = Session::new(cfg, &problem, cfg.run.seeds[0])?;
    let mut xs = vec![session.x().clone()];
    for _ in 0..cfg.run.iters {
        match session.step()? {
            StepOutcome::Moved(_) => xs.push(session.x().clone()),
            StepOutcome::Diverged => break,
        }
    }
    Ok(xs)
}

/// Runs one diagnostic, writes its CSV into `out` and returns a one-line
/// report.
pub fn run_diagnose(kind: DiagnoseKind, cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let problem = cfg.problem.build()?;
    let p = problem.train.as_ref();
    let mut csv = String::new();
    let report = match kind {
        DiagnoseKind::Smoothness => {
            let samples = smoothness_along_trajectory(p, &trajectory(cfg)?)?;
            csv.push_str("t,l_hat,grad_norm\n");
            for s in &samples {
                let _ = writeln!(csv, "{},{},{}", s.t, fmt_f64(s.l_hat), fmt_f64(s.grad_norm));
            }
            write_atomic(&out.join("smoothness.csv"), csv.as_bytes())?;
            let max = samples.iter().fold(0.0f64, |m, s| m.max(s.l_hat));
            format!("samples={} max_l_hat={}", samples.len(), fmt_f64(max))
        }
        DiagnoseKind::L0l1 => {
            let pts = coord_l0l1_scatter(p, &trajectory(cfg)?);
            csv.push_str("j,g_min,ratio\n");
            for q in &pts {
                let _ = writeln!(csv, "{},{},{}", q.j, fmt_f64(q.g_min), fmt_f64(q.ratio));
            }
            write_atomic(&out.join("l0l1.csv"), csv.as_bytes())?;
            let (l0, l1) = fit_l0l1(&pts)?;
            write_atomic(&out.join("l0l1_fit.csv"), format!("l0_fit,l1_fit\n{},{}\n", fmt_f64(l0), fmt_f64(l1)).as_bytes())?;
            format!("points={} l0_fit={} l1_fit={}", pts.len(), fmt_f64(l0), fmt_f64(l1))
        }
        DiagnoseKind::Pl => {
            let mut xs = trajectory(cfg)?;
            if let Some((lo, hi, n)) = cfg.diagnose.as_ref().and_then(|d| d.grid) {
                if p.dim() != 1 || n < 2 || !(hi > lo) {
                    return Err(Error::Config("diagnose.grid needs a one-dimensional problem and lo < hi, points >= 2".into()));
                }
                xs.extend((0..n).map(|k| Vector::filled(1, lo + (hi - lo) * k as f64 / (n - 1) as f64)));
            }
            let f_star = p.meta().f_star.ok_or(Error::MissingMeta("f_star"))?;
            csv.push_str("index,gap,ratio\n");
            for (k, x) in xs.iter().enumerate() {
                let gap = p.eval(x) - f_star;
                if gap > 1e-12 {
                    let ratio = 0.5 * p.grad(x).norm_sq() / gap;
                    let _ = writeln!(csv, "{k},{},{}", fmt_f64(gap), fmt_f64(ratio));
                }
            }
            write_atomic(&out.join("pl.csv"), csv.as_bytes())?;
            format!("points={} min_ratio={}", xs.len(), fmt_f64(pl_audit(p, &xs)?))
        }
        DiagnoseKind::Scalefree => {
            let scales = cfg
                .diagnose
                .as_ref()
                .and_then(|d| d.scales.clone())
                .ok_or_else(|| Error::Config("scalefree needs diagnose.scales".into()))?;
            let scales = Vector::from_slice(&scales)?;
            let make = |_: Vector<f64>| cfg.build_optimizer(p);
            let x0 = Vector::from_slice(&cfg.run.x0)?;
            let seed = seed_rng(cfg.run.master_seed, cfg.run.seeds[0]).next_u64();
            let dev = scale_free_audit(&make, problem.train.clone(), cfg.noise.model()?, &x0, &scales, cfg.run.iters, seed)?;
            let _ = writeln!(csv, "fingerprint,iters,max_dev\n{},{},{}", cfg.fingerprint(), cfg.run.iters, fmt_f64(dev));
            write_atomic(&out.join("audit.csv"), csv.as_bytes())?;
            format!("max_dev={}", fmt_f64(dev))
        }
        DiagnoseKind::Histogram => {
            let xs = trajectory(cfg)?;
            let h = update_histogram(
                xs.windows(2).flat_map(|w| w[1].iter().zip(w[0].iter()).map(|(a, b)| a - b).collect::<Vec<_>>()),
            );
            csv.push_str("bin,lower,upper,count\n");
            for (k, ((lo, hi), c)) in Histogram::bin_edges().iter().zip(h.counts).enumerate() {
                let _ = writeln!(csv, "{k},{},{},{c}", fmt_f64(*lo), fmt_f64(*hi));
            }
            write_atomic(&out.join("histogram.csv"), csv.as_bytes())?;
            format!("updates={} leftmost={} rightmost={}", h.total(), h.counts[0], h.counts[h.counts.len() - 1])
        }
    };
    Ok(report)
}
