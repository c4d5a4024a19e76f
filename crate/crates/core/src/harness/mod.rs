//! Experiment runner: configuration, seeding, report and curve output.
//!
//! Seeds follow a fixed chain: the master seed is tagged with the
//! experiment kind, task `i` of the grid receives `child(i)` of that
//! stream, and replication `r` inside an estimator receives `child(r)` of
//! the task seed. Outputs therefore do not depend on scheduling.

use std::io;
use std::path::Path;

use thiserror::Error;

mod canned;
mod config;
mod fuzz;
mod plot;
mod run;

pub use canned::{canned_experiments, CannedExperiment};
pub use config::{ExperimentConfig, ExperimentKind, ParameterGrid, SCHEMA_VERSION};
pub use fuzz::{skorohod_fuzz, FuzzSummary, CLOSED_FORM_TOL};
pub use plot::{emit_plot_data, grid_variable, plot_series, slug, PlotSeries};
pub use run::{compute_reports, run, RunSummary, FUZZ_TOL};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Run(#[from] crate::error::Error),
}

/// Writes through a temporary sibling and renames, so a crash never leaves
/// a truncated file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
