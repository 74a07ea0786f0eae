use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: no valid rows ({rejected} rejected)")]
    ZeroValidRows { path: PathBuf, rejected: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series of length {len} is too short: need at least {required}")]
    SeriesTooShort { len: usize, required: usize },

    #[error("decomposition depth {levels} out of range 1..={max}")]
    InvalidLevel { levels: usize, max: usize },

    #[error("filter {name} violates {identity} (deviation {deviation:e})")]
    FilterIdentity {
        name: String,
        identity: &'static str,
        deviation: f64,
    },

    #[error("invalid session: {0}")]
    InvalidSession(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("timezone mismatch: expected {expected}, found {found}")]
    TimezoneMismatch { expected: String, found: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("complete or quasi-complete separation: {0}")]
    Separation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}
