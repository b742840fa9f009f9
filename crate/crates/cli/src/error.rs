use std::path::Path;

use thiserror::Error;

/// Failures that end a run with exit code 1. Each variant carries a stable
/// diagnostic tag printed before the message.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    FileNotFound { path: String, message: String },
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::FileNotFound { path: path.display().to_string(), message: "no such file".into() }
        } else {
            CliError::Io(format!("{}: {e}", path.display()))
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CliError::FileNotFound { .. } => "file-not-found",
            CliError::Schema(_) => "schema",
            CliError::Precondition(_) => "precondition",
            CliError::Usage(_) => "usage",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }
}

impl From<aqec::Error> for CliError {
    fn from(e: aqec::Error) -> Self {
        use aqec::Error as E;
        match e {
            E::Schema(_) | E::DimensionMismatch { .. } | E::NotIsometry { .. } | E::NotTracePreserving { .. } => {
                CliError::Schema(e.to_string())
            }
            E::Precondition { .. } => CliError::Precondition(e.to_string()),
            E::UnknownName { .. } | E::Parameter { .. } => CliError::Usage(e.to_string()),
            E::InvalidState { .. } => CliError::Schema(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
