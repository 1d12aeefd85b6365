use std::path::PathBuf;

use noslip_core::Error as CoreError;

/// Errors of the harness, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Dynamics(CoreError),
    #[error("invariant check failed: {0}")]
    Check(String),
}

pub type AppResult<T> = Result<T, AppError>;

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const DYNAMICS: i32 = 3;
    pub const TIMEOUT: i32 = 4;
    pub const CHECK: i32 = 5;
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } | AppError::Csv { .. } => exit::IO,
            AppError::Parse(_) => exit::PARSE,
            AppError::Dynamics(CoreError::Timeout { .. }) => exit::TIMEOUT,
            // Domain errors come from configuration values the parser could not see.
            AppError::Dynamics(CoreError::Domain(_)) => exit::PARSE,
            AppError::Dynamics(_) => exit::DYNAMICS,
            AppError::Check(_) => exit::CHECK,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Dynamics(e)
    }
}
