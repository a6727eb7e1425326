//! Common error type for the library.
//!
//! All fallible operations return [`NcError`]; numerical routines that can
//! only fail on malformed input (size mismatches, out-of-range parameters)
//! use the structured variants so callers can react programmatically.

use thiserror::Error;

/// Errors produced by parsing, symbolic, and numerical operations.
#[derive(Debug, Error)]
pub enum NcError {
    /// Syntax error while parsing a polynomial, with byte position.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A generator index exceeded the declared arity, or two operands
    /// disagree on arity.
    #[error("arity violation: {0}")]
    Arity(String),

    /// Matrix dimensions incompatible with the requested operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A mathematical precondition failed (documented per operation).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A parameter was outside its stated range.
    #[error("parameter out of range: {0}")]
    Range(String),

    /// Numerical linear algebra failure (e.g. SVD non-convergence);
    /// never silently truncated.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// I/O or serialization problems (CLI plumbing).
    #[error("io error: {0}")]
    Io(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, NcError>;
