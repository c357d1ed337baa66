use core::fmt;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain {
        /// Operation that rejected the argument.
        op: &'static str,
        /// What was wrong with it.
        reason: &'static str,
    },
    /// Adaptive quadrature exhausted its subdivision budget.
    NonConvergence {
        /// Best available estimate of the integral.
        estimate: f64,
        /// Error bound attached to `estimate`.
        error: f64,
    },
    /// Two curves that must share a grid do not.
    GridMismatch,
}

/// Shorthand for `core::result::Result<T, Error>`.
pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) const fn domain(op: &'static str, reason: &'static str) -> Self {
        Error::Domain { op, reason }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { op, reason } => write!(f, "domain error in {op}: {reason}"),
            Error::NonConvergence { estimate, error } => write!(
                f,
                "quadrature did not converge (estimate {estimate:e}, error bound {error:e})"
            ),
            Error::GridMismatch => f.write_str("curves are tabulated on different grids"),
        }
    }
}

impl core::error::Error for Error {}
