use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("function is singular on the spectrum: {0}")]
    SingularFunction(String),
    #[error("quadrature did not converge (error estimate {error_estimate:e} after {evaluations} evaluations)")]
    QuadratureNotConverged { error_estimate: f64, evaluations: usize },
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, LabError>;
