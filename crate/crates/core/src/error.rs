use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A configurable engineering cap was exceeded. The caps are not mathematical bounds.
    #[error("{what}: size {size} exceeds the configured cap {cap} (engineering limit, raise it with the matching flag or env var)")]
    Size { what: String, size: u128, cap: u128 },

    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A computed object contradicts one of the structural theorems being checked.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("no prime l = 1 mod {modulus} with l > {lower} found below {bound}")]
    NoPrime { modulus: u64, lower: u64, bound: u64 },
}

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::Mismatch(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
