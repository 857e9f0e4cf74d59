//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the documented domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A value left the dynamic range of the arithmetic backend.
    #[error("range error: {0}")]
    Range(String),
    /// A computation would exceed its configured cost budget.
    #[error("cost budget exceeded: estimated {estimated:.3e} operations, budget {budget:.3e} ({what})")]
    Budget {
        /// Description of the computation.
        what: String,
        /// Estimated cost.
        estimated: f64,
        /// Configured budget.
        budget: f64,
    },
    /// A tangle diagram or data file is structurally inconsistent.
    #[error("validation error: {0}")]
    Validation(String),
    /// A function was evaluated outside its analytic domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Numerical quadrature or iteration did not converge.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// No stationary point passed the geometric selection filter.
    #[error("no admissible stationary point found for {link}; roots found: {roots}")]
    SaddleNotFound {
        /// Link identifier.
        link: String,
        /// Summary of all roots that were found but rejected.
        roots: String,
    },
    /// A reference entry or fixture is missing.
    #[error("missing reference: {0}")]
    MissingReference(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed JSON or CSV input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
