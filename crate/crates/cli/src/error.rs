use std::path::Path;

use thiserror::Error;

/// Exit code for malformed command lines.
pub const EXIT_USAGE: u8 = 64;
/// Exit code for unreadable, invalid or inconsistent data.
pub const EXIT_DATA: u8 = 65;
/// Exit code when a case expected to have solutions yields none.
pub const EXIT_UNEXPECTED_EMPTY: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Io { .. } => EXIT_DATA,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<icosa_core::Error> for CliError {
    fn from(e: icosa_core::Error) -> Self {
        match e {
            icosa_core::Error::InvalidCase(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
