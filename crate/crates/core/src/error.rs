//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point sits on or outside the boundary of the unit ball.
    #[error("point outside the open unit ball (|z| = {norm})")]
    OutsideDomain { norm: f64 },

    /// A scalar parameter violates its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An integrand produced a non-finite value at a quadrature node.
    #[error("evaluation error at node {index} (z = {location}): {reason}")]
    Evaluation {
        index: usize,
        location: String,
        reason: String,
    },

    /// A requested computation exceeds the configured memory/size budget.
    #[error("resource error: {0}")]
    Resource(String),

    /// A quantity is divergent for the requested parameters.
    #[error("divergence error: {0}")]
    Divergence(String),

    /// An operation was invoked on the wrong parameter branch.
    #[error("branch error: {0}")]
    Branch(String),

    /// Configuration could not be parsed or is inconsistent.
    #[error("config error{}: {message}", path.as_ref().map(|p| format!(" at `{p}`")).unwrap_or_default())]
    Config {
        path: Option<String>,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn config(path: Option<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path,
            message: msg.into(),
        }
    }

    /// Process exit code for the CLI; each failure class gets its own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Resource(_) => 3,
            Error::Divergence(_) => 4,
            Error::Io(_) => 5,
            _ => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
