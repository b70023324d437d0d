//! Error type shared across the laboratory.

use thiserror::Error;

/// Errors produced by profile validation, solvers, simulations, and the CLI
/// layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (negative radius,
    /// non-positive dimension, empty grid, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A warping profile failed validation (σ must be positive for r > 0,
    /// vanish at r = 0 with σ'(0) = 1, and tabulated data must be
    /// self-consistent).
    #[error("invalid warping profile: {0}")]
    InvalidProfile(String),

    /// A numerical routine failed to converge or produced non-finite values
    /// where finite ones were required.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An operation was called in a state that does not support it, e.g.
    /// requesting a Khas'minskii certificate for a test function that is
    /// unbounded.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// Configuration file could not be parsed or references unknown items.
    #[error("configuration error: {0}")]
    Config(String),

    /// Underlying I/O failure while reading configs or writing reports.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidParameter`] with a formatted message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Shorthand for [`Error::Numerical`] with a formatted message.
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
