use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operation requires a {expected} mesh")]
    WrongDimension { expected: &'static str },

    #[error(
        "newton iteration did not converge at step {step} after {iterations} iterations \
         (last residual {last_residual:e})"
    )]
    NonConvergence {
        step: usize,
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("singular matrix: zero pivot in column {column}")]
    SingularJacobian { column: usize },

    #[error("non-positive norm sample at index {index}")]
    NonPositiveNorm { index: usize },

    #[error("observed order needs strictly positive errors and ratio > 1")]
    NonPositiveError,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
