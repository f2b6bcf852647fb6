use std::path::PathBuf;

use arbodyn::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Usage(#[from] clap::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Model errors split into validation (2) and numerical (3) failures;
    /// bad input files count as validation errors and I/O failures exit 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_validation() => 2,
            CliError::Model(_) => 3,
            CliError::Input { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
