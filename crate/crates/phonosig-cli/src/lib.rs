//! Pipelines behind the `phonosig` binary: extraction, per-character signal
//! testing, simulation calibration sweeps, and robustness replications.
//! Everything here is deterministic given the configured seed; the worker
//! count changes runtime only, never an output byte.

pub mod commands;
pub mod fmt;

use std::process::ExitCode;

use thiserror::Error;

/// Errors carry their exit code: 2 for bad input, 3 for runs that filter
/// down to nothing, 1 for everything else.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Empty(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Internal(_) => ExitCode::from(1),
            CliError::Input(_) => ExitCode::from(2),
            CliError::Empty(_) => ExitCode::from(3),
        }
    }

    pub fn input(err: impl std::fmt::Display) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<phonosig::chars::CharsError> for CliError {
    fn from(e: phonosig::chars::CharsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<phonosig::tree::NewickError> for CliError {
    fn from(e: phonosig::tree::NewickError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<phonosig::tree::TreeError> for CliError {
    fn from(e: phonosig::tree::TreeError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<phonosig::signal::SignalError> for CliError {
    fn from(e: phonosig::signal::SignalError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Build a rayon pool with the requested worker count. Falls back to the
/// `PHONOSIG_WORKERS` environment variable, then to rayon's default.
pub fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let n = workers.or_else(|| {
        std::env::var("PHONOSIG_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Internal(format!("failed to build thread pool: {e}")))
}
