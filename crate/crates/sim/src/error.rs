use std::path::PathBuf;

use thiserror::Error;

/// Failures of the runner, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("missing seeds: {}", .0.join(", "))]
    MissingSeeds(Vec<String>),

    #[error("seed {seed}: {source}")]
    Simulation {
        seed: u64,
        #[source]
        source: pom_core::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config { .. } | RunError::MissingSeeds(_) => 2,
            RunError::Simulation { .. } => 3,
            RunError::Io { .. } | RunError::Format { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;
