use std::path::PathBuf;

use crate::corpus::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate record id `{id}`")]
    DuplicateId { path: PathBuf, line: usize, id: String },

    #[error("{path}:{line}: self-edge for user `{user}`")]
    SelfEdge { path: PathBuf, line: usize, user: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("class `{0}` has no training instances")]
    MissingClass(Label),

    #[error("class `{label}` has {count} instances, fewer than {folds} folds")]
    ClassTooSmall { label: Label, count: usize, folds: usize },

    #[error("no candidates")]
    NoCandidates,

    #[error("teleportation vector sums to {0}, expected 1")]
    TeleportNotNormalized(f64),

    #[error("model: {0}")]
    Model(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::DuplicateId { .. } => "duplicate_id",
            Error::SelfEdge { .. } => "self_edge",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Empty(_) => "empty",
            Error::MissingClass(_) => "missing_class",
            Error::ClassTooSmall { .. } => "class_too_small",
            Error::NoCandidates => "no_candidates",
            Error::TeleportNotNormalized(_) => "teleport_not_normalized",
            Error::Model(_) => "model",
            Error::Json(_) => "json",
        }
    }
}
