//! Command-line driver: argument parsing, config files, cohort CSV ingestion
//! and deterministic output writing.
//!
//! Every command writes its files plus `manifest.json` (seed and SHA-256 of
//! every input and output) into the `--out` directory. `PROCOVA_WORKERS`
//! sets the worker-thread count; it never changes results.

mod args;
mod commands;
mod config;
mod ingest;
mod output;

pub use args::{
    parse_args, CohortSpec, Command, CurvesArgs, DesignArgs, EvalMethodArg, EvaluateArgs, FormatArg, FractionRange,
    ReportArgs, RunConfig, SimulateArgs,
};
pub use config::{EndpointConfig, FileConfig, RelevanceConfig};
pub use ingest::{cohort_to_csv, ingest_cohort_csv, parse_cohort_csv, sha256_hex};
pub use output::Manifest;

use std::ffi::OsString;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

pub const WORKERS_ENV: &str = "PROCOVA_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Help(_) => EXIT_OK,
            Self::Usage(_) => EXIT_USAGE,
            Self::Data(_) => EXIT_DATA,
            Self::Compute(_) | Self::Io(_) => EXIT_COMPUTE,
        }
    }
}

macro_rules! compute_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Compute(e.to_string())
            }
        }
    )*};
}
compute_error!(
    crate::design::DesignError,
    crate::evaluation::EvalError,
    crate::simulation::SimError,
    crate::credibility::CredibilityError
);

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Compute(e.to_string()))
}

/// Executes a parsed command, returning a summary for standard output.
pub fn try_run(config: &RunConfig) -> Result<String, CliError> {
    for p in config.input_paths() {
        if !p.is_file() {
            return Err(CliError::Usage(format!("input file not found: {}", p.display())));
        }
    }
    let pool = worker_pool()?;
    let outcome = pool.install(|| commands::dispatch(config))?;
    output::write_all(config, &outcome)?;
    Ok(outcome.summary)
}

/// Executes a parsed command and reports errors on standard error.
pub fn run(config: &RunConfig) -> i32 {
    match try_run(config) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("procova {}: {e}", config.name());
            e.exit_code()
        }
    }
}

/// Parses `argv` and runs it; the return value is the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(config) => run(&config),
        Err(CliError::Help(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprint!("{e}");
            if !e.to_string().ends_with('\n') {
                eprintln!();
            }
            e.exit_code()
        }
    }
}
