use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] cojump::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use cojump::Error as E;
        match self {
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Core(e) => match e {
                E::Io { .. } | E::Csv { .. } | E::ZeroValidRows { .. } | E::InvalidInput(_) => "io",
                E::InvalidConfig(_) | E::InvalidSession(_) | E::TimezoneMismatch { .. } => "config",
                _ => "numerical",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "io" => 2,
            "config" => 3,
            _ => 4,
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            CliError::Io { path, .. } => Some(path),
            CliError::Core(cojump::Error::Io { path, .. })
            | CliError::Core(cojump::Error::Csv { path, .. })
            | CliError::Core(cojump::Error::ZeroValidRows { path, .. }) => Some(path),
            _ => None,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "path": self.path().map(|p| p.display().to_string()),
            }
        })
    }
}
