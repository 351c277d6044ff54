//! Driver behind the `susyrg` binary: configuration, table caching, and the
//! decompose / flow / critical / verify commands.

mod commands;
mod config;
pub mod verify;

pub use commands::{
    cmd_critical, cmd_decompose, cmd_flow, cmd_verify, load_or_decompose, CacheStats,
    CriticalOutcome, DecomposeOutcome, MethodChoice,
};
pub use config::RunConfig;
pub use verify::{Check, Suite, VerifyReport};

use std::path::PathBuf;

use susyrg_covariance::CovError;
use susyrg_critical::CriticalError;
use susyrg_flowcoeffs::FlowError;
use susyrg_rgflow::RgError;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("cache file {}: {reason}", path.display())]
    Cache { path: PathBuf, reason: String },
    #[error("solver: {0}")]
    Solver(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 ok, 1 usage or I/O, 2 tolerance, 3 cache, 4 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Tolerance(_) | CliError::Verify(_) => 2,
            CliError::Cache { .. } => 3,
            CliError::Solver(_) => 4,
        }
    }
}

impl From<CovError> for CliError {
    fn from(e: CovError) -> Self {
        match e {
            CovError::Residual { .. } => CliError::Tolerance(e.to_string()),
            CovError::Io(e) => CliError::Io(e),
            CovError::Core(_) | CovError::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Covariance(e) => e.into(),
            FlowError::Io(e) => CliError::Io(e),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<RgError> for CliError {
    fn from(e: RgError) -> Self {
        match e {
            RgError::Io(e) => CliError::Io(e),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<CriticalError> for CliError {
    fn from(e: CriticalError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

/// First line of every CSV output.
pub fn comment_line(cfg: &RunConfig) -> String {
    format!("# susyrg {VERSION} config {}\n", cfg.hash())
}
