use std::fmt;
use std::io;
use std::path::PathBuf;

use crate::ladder::VariantId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid particle system: {0}")]
    InvalidSystem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("variant `{0}` is not available in this build")]
    UnavailableVariant(VariantId),

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("size mismatch: {left} bodies vs {right} bodies")]
    SizeMismatch { left: usize, right: usize },

    #[error("{path}: {source}")]
    Snapshot {
        path: PathBuf,
        #[source]
        source: SnapshotError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// A snapshot parse failure, located at a 1-based line number.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct SnapshotError {
    pub line: usize,
    pub kind: SnapshotErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotErrorKind {
    MalformedHeader(String),
    RecordCountMismatch { expected: usize, found: usize },
    WrongFieldCount { found: usize },
    UnparseableScalar(String),
    NonFinite(String),
    NonPositiveMass(String),
}

impl fmt::Display for SnapshotErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MalformedHeader(msg) => write!(f, "malformed header: {msg}"),
            Self::RecordCountMismatch { expected, found } => {
                write!(f, "header declares {expected} records but {found} were found")
            }
            Self::WrongFieldCount { found } => {
                write!(f, "expected 7 fields per record, found {found}")
            }
            Self::UnparseableScalar(tok) => write!(f, "unparseable scalar `{tok}`"),
            Self::NonFinite(tok) => write!(f, "non-finite value `{tok}`"),
            Self::NonPositiveMass(tok) => write!(f, "mass must be strictly positive, got `{tok}`"),
        }
    }
}
