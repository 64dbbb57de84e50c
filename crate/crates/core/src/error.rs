use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} is not symmetric positive-definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("forward model evaluation failed: {0}")]
    Evaluation(String),

    #[error(
        "forward model provides no second derivatives; wrap it in \
         `FiniteDifferenceHessian` to synthesize them for the full Jacobian"
    )]
    SecondDerivativeUnavailable,

    #[error("degenerate proposal: transformation Jacobian is exactly singular")]
    SingularJacobian,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),

    #[error("chain initialization failed after {0} consecutive optimizer failures")]
    Initialization(usize),

    #[error("empty sample set")]
    EmptySamples,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
