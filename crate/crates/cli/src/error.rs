use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::ConfigError;

/// Process exit codes. These are a stable contract for scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Completed = 0,
    /// `check` found a violated invariant.
    CheckFailed = 1,
    Config = 2,
    Breakdown = 3,
    Diverged = 4,
    Io = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Solver(#[from] peakflow::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) | CliError::Solver(_) => Exit::Config,
            CliError::Io { .. } => Exit::Io,
        }
    }
}
