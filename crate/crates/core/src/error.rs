use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty after filtering")]
    EmptyCorpus,

    #[error("cannot split corpus: {0}")]
    Split(String),

    #[error("document is empty")]
    EmptyDocument,

    #[error("non-finite value at index {index} of {what}")]
    NumericInput { what: &'static str, index: usize },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("exhaustive simplex oracle supports at most {max} coordinates, got {got}")]
    OracleSize { max: usize, got: usize },

    #[error("non-finite activation in encoder layer `{layer}`")]
    NumericOverflow { layer: &'static str },

    #[error("non-finite gradient in parameter tensor `{tensor}`")]
    NonFiniteGradient { tensor: &'static str },

    #[error("non-finite loss term `{term}`")]
    NonFiniteLoss { term: &'static str },

    #[error("unknown term `{0}`")]
    UnknownTerm(String),

    #[error("term id {0} is outside the vocabulary")]
    TermOutOfRange(usize),

    #[error("term `{0}` never occurs in the reference corpus")]
    ZeroMarginal(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),
}
