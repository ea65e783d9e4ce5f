use thiserror::Error;

/// Errors produced by the RIS models, solvers and experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch in {op}: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix is numerically singular (pivot {pivot:e} below threshold {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("singular RIS configuration: {0}")]
    SingularConfiguration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank-deficient input, nearest unitary matrix is not unique (min singular value {0:e})")]
    AmbiguousProjection(f64),

    #[error("channel generation failed: {0}")]
    GenerationFailure(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver aborted: {0}")]
    SolverAbort(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
