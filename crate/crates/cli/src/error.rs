use std::path::PathBuf;

use nvisc::error::Error as CoreError;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    /// Unreadable or malformed input data.
    #[error("{op}: {source}")]
    Input { op: &'static str, source: CoreError },

    #[error("{op}: {source}")]
    Numerical { op: &'static str, source: CoreError },

    #[error("{op}: empty result: {detail}")]
    Empty { op: &'static str, detail: String },

    #[error("{path}: cannot write output: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Empty { .. } => 4,
            CliError::Write { .. } => 1,
        }
    }
}

/// Classifies a core error raised while running `op`.
pub fn core(op: &'static str) -> impl Fn(CoreError) -> CliError {
    move |source| match source {
        CoreError::Parse { .. } | CoreError::Io { .. } | CoreError::InvalidParameter { .. } => {
            CliError::Input { op, source }
        }
        _ => CliError::Numerical { op, source },
    }
}
