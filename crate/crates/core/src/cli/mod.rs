//! Command-line plumbing: configs, experiment runners, report files and the
//! canned acceptance suites.

pub mod acceptance;
pub mod config;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::report::{self, Envelope, ReportError};
pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use run::{run_experiment, RunError, RunOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot build a pool of {threads} threads: {message}")]
    Pool { threads: usize, message: String },
    #[error("cannot create output directory {path}: {source}")]
    OutDir { path: String, source: std::io::Error },
}

/// Runs `f` on a dedicated rayon pool with `threads` workers (0 = default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Pool { threads, message: e.to_string() })?;
    Ok(pool.install(f))
}

/// Paths written by [`execute`].
#[derive(Clone, Debug)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub output: RunOutput,
}

/// Runs a config and writes `<kind>.csv` and `<kind>.json` under `out_dir`.
pub fn execute(cfg: &ExperimentConfig, threads: usize, out_dir: &Path) -> Result<Written, CliError> {
    let start = Instant::now();
    let (output, used) = with_threads(threads, || (run_experiment(cfg), rayon::current_num_threads()))?;
    let output = output?;
    std::fs::create_dir_all(out_dir)
        .map_err(|source| CliError::OutDir { path: out_dir.display().to_string(), source })?;
    let name = cfg.kind.name();
    let csv = out_dir.join(format!("{name}.csv"));
    let json = out_dir.join(format!("{name}.json"));
    report::write_file(&csv, &report::csv_bytes(&output.rows)?)?;
    let envelope = Envelope {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: name,
        config: serde_json::to_value(cfg).map_err(ReportError::from)?,
        seed: cfg.seed.unwrap_or_default(),
        threads: used,
        wall_time_s: start.elapsed().as_secs_f64(),
        invariants: output.invariants.clone(),
        summary: output.summary.clone(),
    };
    report::write_json(&json, &envelope)?;
    Ok(Written { csv, json, output })
}
