use thiserror::Error;

/// Failure classes of a scenario run, each mapped to a fixed process exit
/// code: input problems (unreadable or malformed files, assumption
/// violations, bad weight data) exit 1, certification refusals exit 2.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Certification(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) | RunError::Io { .. } => 1,
            RunError::Certification(_) => 2,
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;
