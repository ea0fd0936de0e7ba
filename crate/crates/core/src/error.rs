use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factorization mismatch: {0}")]
    FactorizationMismatch(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("measured factor has dimension {0}; only dimensions up to 4 are supported")]
    UnsupportedDimension(usize),

    #[error("relative-coordinate pairs are linearly dependent")]
    DependentPairs,

    #[error("not a canonical transformation: symplectic residual {0:e}")]
    NotCanonical(f64),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid structure coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("Fock truncation too small: top-level population {population:e}")]
    TruncationWarning { population: f64 },

    #[error("step size too large: {0}")]
    StepSizeTooLarge(String),

    #[error("invalid Bogoliubov specification: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("parse error: {0}")]
    Parse(String),
}
