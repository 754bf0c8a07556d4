use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed user input: spec strings, grids, files.
    #[error("parse error: {0}")]
    Parse(String),
    /// A mathematical precondition of the requested operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The zero-extension margin of a grid function is too small.
    #[error("margin violation: need {needed} samples of zero padding, have {available} on axis {axis}")]
    Margin {
        axis: usize,
        needed: usize,
        available: usize,
    },
    /// Two grid functions do not live on one lattice.
    #[error("incompatible lattices: {0}")]
    Lattice(String),
    /// A numerical routine produced a non-finite value or failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}
