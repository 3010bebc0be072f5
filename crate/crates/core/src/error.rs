use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    Duplicate { kind: &'static str, id: String },

    #[error("empty sequence body for record `{0}`")]
    EmptySequence(String),

    #[error("lineage edge ({a}, {b}) references unknown sequence `{missing}`")]
    DanglingEndpoint {
        a: String,
        b: String,
        missing: String,
    },

    #[error("lineage edge is a self-loop on `{0}`")]
    SelfLoop(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("no label for sequence `{0}`")]
    MissingLabel(String),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("ensemble members are not aligned: {0}")]
    Alignment(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("category `{category}` has {available} eligible records, fewer than the holdout minimum of {required}")]
    InfeasibleCategory {
        category: String,
        available: usize,
        required: usize,
    },

    #[error("split constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("unrecognised {field} value `{value}` and the group has no `_other` column")]
    UnmappedMetadata { field: String, value: String },

    #[error("k-mer length mismatch: index uses k={index}, requested k={requested}")]
    KMismatch { index: usize, requested: usize },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
