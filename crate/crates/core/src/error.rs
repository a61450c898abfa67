//! Error taxonomy shared by every module in this crate.
//!
//! The variants matter to callers: `Inconsistent` means an internal
//! cross-check failed (two routes to the same quantity disagreed), which is
//! a stronger statement than a bad input or a precision shortfall, and the
//! CLI maps it to its own exit code.

use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Invalid mathematical input (non-discriminant, zero discriminant
    /// model, point off the curve, ...).
    Domain(String),
    /// The requested precision cannot be met (non-convergent iteration,
    /// working precision exhausted, target below the supported floor).
    Precision(String),
    /// Two independent internal routes to the same quantity disagreed.
    Inconsistent(String),
    /// The quantity is genuinely outside what this code computes
    /// (for example a local factor at a prime of joint bad reduction
    /// with high multiplicity).
    Unavailable(String),
    /// Rational or quadratic recognition failed within the stated bounds.
    Recognition(String),
    /// Malformed external data (curve table rows, sweep files).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Precision(m) => write!(f, "precision error: {m}"),
            Error::Inconsistent(m) => write!(f, "internal consistency error: {m}"),
            Error::Unavailable(m) => write!(f, "unavailable: {m}"),
            Error::Recognition(m) => write!(f, "recognition failure: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
