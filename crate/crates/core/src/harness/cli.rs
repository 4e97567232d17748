//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::compare::{compare, compare_csv, grad_series, parse_compare};
use super::config::{expand_grid, parse_table, ExperimentConfig};
use super::diagnose::{run_diagnose, DiagnoseKind};
use super::grid::{grid_search, Metric};
use super::io::{summary_csv, timing_csv, trajectory_csv, write_atomic, Table};
use super::run::{run_experiment, with_pool};
use super::svg::{emit_svg_lines, Axes, Series};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "adaptix", version, about = "Adaptive optimizer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration over all of its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every point of a grid and rank the results.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "final_loss")]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several optimizers on a shared problem and overlay their curves.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a diagnostic on the trajectory of a configuration.
    Diagnose {
        #[arg(value_enum)]
        kind: DiagnoseKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot two columns of a CSV file as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        logx: bool,
        #[arg(long)]
        logy: bool,
        /// Column splitting rows into series; defaults to `seed` or `label` when present.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        title: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(&read_input(path)?)
}

fn write_run_outputs(out: &Path, r: &super::run::RunResult) -> Result<()> {
    write_atomic(&out.join("trajectory.csv"), trajectory_csv(&r.records())?.as_bytes())?;
    write_atomic(&out.join("summary.csv"), summary_csv(&[(r.summary.clone(), None, String::new())])?.as_bytes())?;
    write_atomic(&out.join("timing.csv"), timing_csv(std::slice::from_ref(&r.summary))?.as_bytes())?;
    write_atomic(&out.join("config.toml"), r.config.to_toml_string()?.as_bytes())
}

fn summary_line(s: &super::run::SummaryRow) -> String {
    format!(
        "{} [{}] final_f={:e} ± {:e} tail_grad={:e} ± {:e} diverged={}/{} converged={} wall_ms={:.1}",
        s.label,
        s.fingerprint,
        s.final_f.mean,
        s.final_f.ci,
        s.tail_grad.mean,
        s.tail_grad.ci,
        s.diverged,
        s.seeds,
        s.converged,
        s.wall_ms
    )
}

fn plot_table(text: &str, x: &str, y: &str, group: Option<&str>) -> Result<Vec<Series>> {
    let table = Table::parse(text)?;
    let (xc, yc) = (table.column(x)?, table.column(y)?);
    let group = match group {
        Some(g) => Some(table.column(g)?),
        None => ["label", "seed"].iter().find_map(|g| table.column(g).ok()),
    };
    let mut series: Vec<Series> = Vec::new();
    for (k, (_, row)) in table.rows.iter().enumerate() {
        let key = group.map_or_else(|| y.to_string(), |g| row[g].clone());
        let point = (table.float(k, xc)?, table.float(k, yc)?);
        match series.iter_mut().find(|s| s.label == key) {
            Some(s) => s.points.push(point),
            None => series.push(Series { label: key, points: vec![point] }),
        }
    }
    Ok(series)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let r = with_pool(|| run_experiment(&cfg))?;
            write_run_outputs(&out, &r)?;
            println!("{}", summary_line(&r.summary));
        }
        Command::Grid { config, metric, out } => {
            let grid = expand_grid(&parse_table(&read_input(&config)?)?)?;
            let outcome = with_pool(|| grid_search(&grid, metric))?;
            let warning = outcome.warnings.join("; ");
            let rows: Vec<_> = outcome
                .ranked
                .iter()
                .enumerate()
                .map(|(k, r)| (r.summary.clone(), Some(k + 1), if k == 0 { warning.clone() } else { String::new() }))
                .collect();
            write_atomic(&out.join("grid_summary.csv"), summary_csv(&rows)?.as_bytes())?;
            let summaries: Vec<_> = outcome.ranked.iter().map(|r| r.summary.clone()).collect();
            write_atomic(&out.join("timing.csv"), timing_csv(&summaries)?.as_bytes())?;
            let best = outcome.best();
            write_run_outputs(&out.join("best"), best)?;
            println!("points={} best: {}", outcome.ranked.len(), summary_line(&best.summary));
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Compare { config, out } => {
            let cfgs = parse_compare(&read_input(&config)?)?;
            let results = with_pool(|| compare(&cfgs))?;
            let rows: Vec<_> = results.iter().map(|(_, r)| (r.summary.clone(), None, String::new())).collect();
            write_atomic(&out.join("summary.csv"), summary_csv(&rows)?.as_bytes())?;
            write_atomic(&out.join("compare.csv"), compare_csv(&results)?.as_bytes())?;
            let summaries: Vec<_> = results.iter().map(|(_, r)| r.summary.clone()).collect();
            write_atomic(&out.join("timing.csv"), timing_csv(&summaries)?.as_bytes())?;
            let axes = Axes {
                x: "iteration".into(),
                y: "mean ‖∇F‖²".into(),
                logx: true,
                logy: true,
                title: "gradient norm".into(),
            };
            write_atomic(&out.join("compare.svg"), emit_svg_lines(&grad_series(&results), &axes)?.as_bytes())?;
            for (_, r) in &results {
                println!("{}", summary_line(&r.summary));
            }
        }
        Command::Diagnose { kind, config, out } => {
            let cfg = load(&config)?;
            let report = with_pool(|| run_diagnose(kind, &cfg, &out))?;
            println!("{report}");
        }
        Command::Plot { csv, x, y, logx, logy, group, title, out } => {
            let text = read_input(&csv)?;
            let series = plot_table(&text, &x, &y, group.as_deref())?;
            let axes = Axes { x, y, logx, logy, title: title.unwrap_or_default() };
            write_atomic(&out, emit_svg_lines(&series, &axes)?.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
///
/// Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
/// runtime errors.
pub fn cli_main<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                1
            } else {
                2
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["adaptix", "frobnicate"]), 1);
        assert_eq!(cli_main(["adaptix"]), 1);
        assert_eq!(cli_main(["adaptix", "run", "--config", "/nonexistent.toml", "--out", "/tmp/x"]), 1);
        assert_eq!(cli_main(["adaptix", "--help"]), 0);
    }

    #[test]
    fn plot_groups_by_seed() {
        let text = "seed,iter,v\n0,1,1.0\n0,2,2.0\n1,1,3.0\n1,2,4.0\n";
        let s = plot_table(text, "iter", "v", None).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].points, vec![(1.0, 3.0), (2.0, 4.0)]);
        assert!(plot_table(text, "iter", "missing", None).is_err());
    }
}
