//! Declarative experiments: configuration, multi-seed runs, grid search,
//! comparisons, diagnostics, CSV/SVG output and the command-line front end.
//!
//! Work is spread over seeds and grid points with rayon; every run is
//! sequential and seeded by `(master_seed, seed)`, so outputs do not depend on
//! the thread count (`ADAPTIX_THREADS`).

mod cli;
pub mod compare;
pub mod config;
pub mod diagnose;
pub mod grid;
pub mod io;
pub mod run;
pub mod svg;

pub use cli::cli_main;
pub use compare::{compare, parse_compare};
pub use config::{expand_grid, parse_table, ExperimentConfig, GridSpec, NoiseSpec, OptimizerSpec, ProblemSpec};
pub use diagnose::{run_diagnose, DiagnoseKind};
pub use grid::{grid_search, GridOutcome, Metric};
pub use io::{read_csv, write_csv};
pub use run::{run_experiment, MeanCi, RunResult, SeedResult, SummaryRow, TrajectoryRecord};
pub use svg::{emit_svg_lines, Axes, Series};
