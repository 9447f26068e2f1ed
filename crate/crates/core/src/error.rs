use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("total dimension {0} exceeds the dense cap of {cap}", cap = crate::state::MAX_TOTAL_DIM)]
    TooLarge(usize),

    #[error("matrix is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalized (defect {0:e})")]
    NotNormalized(f64),

    #[error("negative eigenvalue {0:e} below the clamp window")]
    NegativeEigenvalue(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),

    #[error("measured subsystem has dimension {0}, above the optimizer cap of 16")]
    OptimizerCap(usize),

    #[error("conditioning outcome has probability {0:e}")]
    ZeroProbability(f64),

    #[error("integrator positivity breach at t = {t}: min eigenvalue {min_eigenvalue:e}")]
    StepFailure { t: f64, min_eigenvalue: f64 },

    #[error("robustness condition violated (residual {0:e})")]
    Robustness(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}
