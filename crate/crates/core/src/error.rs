use alloc::string::String;

/// Errors returned by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid multiplicity vector: {0}")]
    InvalidMultiplicity(String),
    #[error("invalid initial vector: {0}")]
    InvalidInitialVector(String),
    #[error("invalid multipermutation: {0}")]
    InvalidMultipermutation(String),
    #[error("invalid multipermutation matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("codebook too large to enumerate: {size} exceeds cap {cap}")]
    CapExceeded { size: String, cap: usize },
    #[error("matrix is not in the multipermutation polytope: {0}")]
    NotInHull(String),
    #[error("invalid codeword: {0}")]
    InvalidCodeword(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program solver did not converge")]
    NoConvergence,
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
}

pub type Result<T> = core::result::Result<T, Error>;
