//! Error type shared by every module in the crate.

/// Failure modes surfaced by simulation and fitting routines.
///
/// Construction helpers keep call sites terse; the `Display` text is the
/// user-facing diagnostic and should name the offending quantity.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition (negative power, empty
    /// curve, out-of-range index, …).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A computation could not produce a meaningful result (profile never
    /// crosses half maximum, singular normal equations, …).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An iterative fit ran out of iterations without meeting its
    /// termination criterion.
    #[error("fit did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
