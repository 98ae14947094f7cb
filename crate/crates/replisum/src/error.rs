//! Error types shared across the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// A validation failure in one row of an input dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are structurally wrong for the requested operation
    /// (missing variance ratio, missing weights, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// One or more dataset rows failed validation.
    #[error("data error: {} invalid row(s){}", .0.len(),
            .0.first().map_or(String::new(), |r| format!("; first: {r}")))]
    Data(Vec<RowError>),

    /// A design target that no finite sample size can reach. Carries the
    /// attainable limit (the power reached as the relative sample size
    /// grows without bound).
    #[error("target power unattainable: the achievable limit is {achievable:.6}")]
    Unattainable { achievable: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code for the command-line interface:
    /// 1 usage/domain, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Usage(_) | Error::Unattainable { .. } => 1,
            Error::Data(_) | Error::Io(_) | Error::Csv(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}
