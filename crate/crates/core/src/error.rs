use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the zero form has no normalised Hessian")]
    ZeroForm,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("matrix is rank deficient: singular value {index} vanishes")]
    RankDeficient { index: usize },
    #[error("all {b}x{b} minors of the Hessian vanish at the base point")]
    VanishingMinor { b: usize },
    #[error("eigenvalue {index} of the Hessian vanishes at the base point")]
    ZeroEigenvalue { index: usize },
    #[error("form {0} is not diagonal")]
    NonDiagonal(usize),
    #[error("non-finite input")]
    NonFinite,
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("p^k = {0} exceeds the supported modulus 512")]
    DepthTooLarge(u64),
    #[error("point lies outside the box of radius {0}")]
    PointOutsideBox(i64),
    #[error("predicted main term vanishes")]
    ZeroPrediction,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
