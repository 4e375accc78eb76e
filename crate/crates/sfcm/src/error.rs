//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by corpus handling, training, and model persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("review `{0}` has no sentiment label")]
    Unlabeled(String),

    #[error("unknown id `{0}` in embedding table lookup")]
    UnknownId(String),

    #[error("text for `{0}` is empty after normalization")]
    EmptyText(String),

    #[error("empty text yields no features")]
    NoFeatures,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("zero-norm embedding for `{0}`")]
    ZeroNorm(String),

    #[error("need at least two distinct classes, found {0}")]
    SingleClass(usize),

    #[error("evaluation input: {0}")]
    Eval(String),

    #[error("bad magic bytes: not a model container")]
    BadMagic,

    #[error("unsupported model container version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated model container: {0}")]
    Truncated(String),

    #[error("array `{name}` declared {declared} values but payload holds {actual}")]
    ArraySize {
        name: String,
        declared: usize,
        actual: usize,
    },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn row(row: usize, message: impl Into<String>) -> Self {
        Error::Row {
            row,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
