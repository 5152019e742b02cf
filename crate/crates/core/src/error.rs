use thiserror::Error;

/// Errors raised by the estimation, simulation, and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("diagonal entry {index} must be finite and strictly positive")]
    NonPositiveDiagonal { index: usize },

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("closed-form beta update failed: quadratic coefficient {0} is not negative")]
    BetaUpdate(f64),

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: line {line}: {message}")]
    Data {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn in_row(self, row: usize) -> Self {
        match self {
            e @ Error::Row { .. } => e,
            e => Error::Row {
                row,
                source: Box::new(e),
            },
        }
    }
}
