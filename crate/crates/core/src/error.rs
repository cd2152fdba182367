use thiserror::Error;

/// Errors raised by the optimizers, test problems and the benchmark runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite objective value {value} at candidate {index}")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("population size mismatch: expected {expected} candidates, got {actual}")]
    PopulationSize { expected: usize, actual: usize },

    #[error("covariance matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("non-finite covariance matrix")]
    NonFiniteCovariance,

    #[error("wrong problem kind: {0}")]
    WrongProblemKind(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable tag, used in run records for aborted trials.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFiniteValue { .. } => "non_finite_value",
            Error::PopulationSize { .. } => "population_size",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NonFiniteCovariance => "non_finite_covariance",
            Error::WrongProblemKind(_) => "wrong_problem_kind",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }
}
