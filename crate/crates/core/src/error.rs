use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomials live in different variable lists")]
    VariableMismatch,
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("architecture {0} is not reduced; call reduce_arch first")]
    NotReduced(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("every input polynomial is zero")]
    AllZero,
    #[error("data matrix is rank deficient")]
    RankDeficient,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
