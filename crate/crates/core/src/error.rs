use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file contains no data rows")]
    EmptyFile { path: PathBuf },

    /// Rows and columns are 1-based.
    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row}, column {column}: missing value")]
    MissingValue { path: PathBuf, row: usize, column: usize },

    #[error("{path}: row {row}, column {column}: non-finite value {value:?}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("label column {0} not found")]
    LabelColumn(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("empty point set")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("requested {requested} folds for a dataset of {size} points")]
    TooManyFolds { requested: usize, size: usize },

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("rank {rank} out of range (1..={available})")]
    RankOutOfRange { rank: usize, available: usize },

    #[error("neighborhood size {k} out of range (1..={max})")]
    KOutOfRange { k: usize, max: usize },

    #[error("model file: line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
