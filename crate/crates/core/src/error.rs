use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A row of `S * diag(q)` summed to zero, so it cannot be row-normalized.
    #[error("degenerate row {row}: zero mass after prior scaling")]
    DegenerateRow { row: usize },

    #[error("empty reference set: every example exceeded tau = {tau}")]
    EmptyReference { tau: f64 },

    #[error("expected accuracy of the source distribution is zero; gain is undefined")]
    UndefinedGain,

    #[error("sampling failed for m = {m} in ambiguity interval {interval} after {draws} draws")]
    SamplingFailure { m: usize, interval: String, draws: usize },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("record {id}: {message}")]
    Constraint { id: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for rejected input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateRow { .. } | Error::SamplingFailure { .. } | Error::UndefinedGain => 2,
            _ => 1,
        }
    }
}
