//! Error taxonomy shared by every layer of the library.
//!
//! Each variant maps onto one of the documented process exit codes through
//! [`Error::exit_code`]: `2` for malformed or inconsistent input, `3` when the
//! mathematics rejects the data (a hypothesis of a theorem fails), and `4` when
//! a resource budget (degree, precision, size) would be exceeded.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Attempted to invert an element of positive valuation.
    #[error("element is not a unit (valuation {valuation})")]
    NonUnit { valuation: String },

    /// Weierstrass division by a polynomial that is not distinguished.
    #[error("divisor is not distinguished: {reason}")]
    BadDivisor { reason: String },

    /// A degree, precision or size budget would be exceeded.
    #[error("resource limit exceeded: {what}")]
    ResourceLimit { what: String },

    /// Structurally invalid input; `field` names the offending field.
    #[error("invalid input in `{field}`: {message}")]
    InvalidInput { field: String, message: String },

    /// A rank table violates the divisibility or monotonicity constraints.
    #[error("level {level}: {message}")]
    InvalidRankTable { level: usize, message: String },

    /// The growth-sequence kind does not match what the setting requires.
    #[error("setting mismatch: {message}")]
    Setting { message: String },

    /// A hypothesis of the theorem being applied does not hold.
    #[error("hypothesis violated: {message}")]
    Hypothesis { message: String },

    /// The finite-level data admit no exact elementary-type solution.
    #[error("classification failed at level {level}: {message}")]
    Classification { level: usize, message: String },

    /// Filesystem or serialization failure (CLI layer).
    #[error("i/o failure: {message}")]
    Io { message: String },
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonUnit { .. }
            | Error::BadDivisor { .. }
            | Error::InvalidInput { .. }
            | Error::InvalidRankTable { .. }
            | Error::Setting { .. }
            | Error::Io { .. } => 2,
            Error::Hypothesis { .. } | Error::Classification { .. } => 3,
            Error::ResourceLimit { .. } => 4,
        }
    }

    pub(crate) fn input(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidInput { field: field.to_string(), message: message.into() }
    }

    pub(crate) fn resource(what: impl Into<String>) -> Self {
        Error::ResourceLimit { what: what.into() }
    }

    pub(crate) fn hypothesis(message: impl Into<String>) -> Self {
        Error::Hypothesis { message: message.into() }
    }
}
