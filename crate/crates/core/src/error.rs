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

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("node id {id} out of range for {n_nodes} nodes (line {line})")]
    NodeOutOfRange {
        id: usize,
        n_nodes: usize,
        line: usize,
    },

    #[error("row count mismatch in {what}: expected {expected}, found {found}")]
    RowCount {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("labels skip class {missing} (classes must be 0..{n_classes})")]
    LabelGap { missing: usize, n_classes: usize },

    #[error("unknown split token {token:?} on line {line}")]
    UnknownSplit { token: String, line: usize },

    #[error("malformed binary blob: {0}")]
    Format(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("class {0} has no training rows")]
    MissingClass(usize),

    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("cannot form {k} clusters from {n} points")]
    ClusterCount { k: usize, n: usize },

    #[error("correlation undefined: zero variance")]
    UndefinedCorrelation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// True when the failure originates in input files rather than in
    /// parameters or numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MissingFile(_)
                | Error::Parse { .. }
                | Error::NodeOutOfRange { .. }
                | Error::RowCount { .. }
                | Error::LabelGap { .. }
                | Error::UnknownSplit { .. }
                | Error::Format(_)
                | Error::NonFinite { .. }
        )
    }
}
