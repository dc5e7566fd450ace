use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator, theory, or harness layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KelsimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error at line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate case: {0}")]
    Degenerate(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("state corruption: {0}")]
    StateCorruption(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("I/O error on {path}: {msg}")]
    Io { path: PathBuf, msg: String },
}

impl KelsimError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        KelsimError::Io {
            path: path.into(),
            msg: err.to_string(),
        }
    }

    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numeric aborts, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            KelsimError::Config(_) | KelsimError::ConfigLine { .. } => 2,
            KelsimError::Numeric(_) | KelsimError::StateCorruption(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = KelsimError> = std::result::Result<T, E>;
