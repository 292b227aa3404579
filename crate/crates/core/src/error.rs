use std::fmt;

use thiserror::Error;

/// Errors raised by the engine.
///
/// The variants line up with the exit-code classes of the command line
/// front end: input problems, numeric failures, resource guards and
/// violated mathematical contracts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("interval collapse failed: {0}")]
    Collapse(Box<CollapseFailure>),
}

/// A degree where the triangle machinery was required to produce an exact
/// value (or an exact zero) and did not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseFailure {
    /// Which profile failed, e.g. `"A_3(1, 2)"`.
    pub object: String,
    pub degree: i64,
    /// Rendered interval that was found.
    pub found: String,
    /// Rendered value that was required.
    pub expected: String,
}

impl fmt::Display for CollapseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at degree {}: found {}, expected {}",
            self.object, self.degree, self.found, self.expected
        )
    }
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
