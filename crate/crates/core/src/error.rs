use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("elements live over different theta matrices")]
    ThetaMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not antisymmetric (residual {0:e})")]
    NotAntisymmetric(f64),
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{rule} rule does not support d = {d}")]
    UnsupportedDimension { rule: &'static str, d: usize },
    #[error("a Lipschitz constant is required for the remainder bound")]
    MissingLipschitz,
    #[error("matrix is not special unitary (residual {0:e})")]
    NotSpecialUnitary(f64),
    #[error("matrix fails the {0} membership test")]
    NotInGroup(&'static str),
    #[error("shift is not aligned with the grid spacing")]
    UnalignedShift,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
