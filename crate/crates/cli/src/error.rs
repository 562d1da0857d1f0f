use std::io;
use std::path::PathBuf;

/// Exit status for a submission that fails the authenticity check.
pub const EXIT_UNAUTHENTICATED: i32 = 2;
/// Exit status for malformed keys, compiled policies or submissions.
pub const EXIT_DECODE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },

    #[error("submission `{0}` failed authentication; nothing stored")]
    Unauthenticated(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] pbcap_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn decode(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Decode { path: path.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unauthenticated(_) => EXIT_UNAUTHENTICATED,
            CliError::Decode { .. } => EXIT_DECODE,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
