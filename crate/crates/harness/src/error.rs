use std::path::{Path, PathBuf};

use qchain_core::ChainError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    InFile { path: PathBuf, message: String },
    #[error("simulation: {0}")]
    Chain(#[from] ChainError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("input data: {0}")]
    Input(String),
}

impl HarnessError {
    /// Short machine-readable category for error manifests.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) | HarnessError::InFile { .. } => "config",
            HarnessError::Chain(_) => "simulation",
            HarnessError::Io { .. } => "io",
            HarnessError::Input(_) => "input",
        }
    }

    pub(crate) fn context(self, path: &Path) -> Self {
        match self {
            HarnessError::Config(message) => HarnessError::InFile { path: path.to_path_buf(), message },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
