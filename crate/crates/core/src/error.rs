use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("cannot parse cell at row {row}, column {col}: {text:?}")]
    ParseCell { row: usize, col: usize, text: String },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("column {0:?} has no observed values")]
    AllMissingColumn(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("overparameterized imputation model: {observed} observed cases for {parameters} parameters")]
    Overparameterized { observed: usize, parameters: usize },

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("chain {chain}, iteration {iteration}, column {column}: non-finite imputation")]
    NonFiniteImputation {
        chain: usize,
        iteration: usize,
        column: usize,
    },

    #[error("chain {chain}: {source}")]
    Chain {
        chain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
