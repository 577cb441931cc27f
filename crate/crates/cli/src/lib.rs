//! Experiment orchestration for `levelgen`: config loading, single runs,
//! multi-seed batches and their reports.

pub mod batch;
pub mod config;
pub mod run;
pub mod summary;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("bin {bin} of {run} is empty")]
    EmptyBin { run: PathBuf, bin: String },
    #[error("{failed} of {total} runs failed (seeds: {seeds})")]
    PartialBatch { failed: usize, total: usize, seeds: String },
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 when some runs of
    /// a batch failed, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::PartialBatch { .. } => 3,
            _ => 1,
        }
    }
}

impl From<levelgen_core::mapelites::RunError> for CliError {
    fn from(e: levelgen_core::mapelites::RunError) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
