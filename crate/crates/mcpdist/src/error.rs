use std::io;

use thiserror::Error;

/// Failures of the command line and its library entry points.
#[derive(Debug, Error)]
pub enum AppError {
    /// Bad flags, parameters or configuration.
    #[error("{0}")]
    Parameter(String),
    /// A numerical routine failed.
    #[error(transparent)]
    Numeric(#[from] mcpdist_core::Error),
    /// Reading or writing a file failed.
    #[error("{0}")]
    Io(#[from] io::Error),
    /// A validation suite found a failing check.
    #[error("validation failed: {0}")]
    Validation(String),
}

/// Shorthand for results carrying [`AppError`].
pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    /// Process exit status: 1 for usage and parameter errors, 2 for failed
    /// validation, 3 for quadrature non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Numeric(mcpdist_core::Error::NonConvergence { .. }) => 3,
            AppError::Validation(_) => 2,
            _ => 1,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Parameter(_) => "parameter",
            AppError::Numeric(mcpdist_core::Error::NonConvergence { .. }) => "nonconvergence",
            AppError::Numeric(_) => "numeric",
            AppError::Io(_) => "io",
            AppError::Validation(_) => "validation",
        }
    }
}
