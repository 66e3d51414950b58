use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] oamcap_core::error::Error),
    #[error("numerical check failed: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// 1 for configuration and output-path problems, 2 for numerical
    /// failures, 3 for a failed verification run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Output { .. } => 1,
            Self::Core(_) | Self::Numerical(_) => 2,
            Self::Verify(_) => 3,
        }
    }
}
