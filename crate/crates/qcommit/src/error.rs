use std::path::PathBuf;

use qcommit_core::Error as CoreError;

/// Failures surfaced by the command layer, each with a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON; `offset` is the byte position of the failure.
    #[error("{path}: parse error at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        path: PathBuf,
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("{0}")]
    Output(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 validation and input errors, 3 training contracts, 4 size guards.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => 2,
            CliError::Core(CoreError::Validation { .. } | CoreError::Topology(_)) => 2,
            CliError::Core(CoreError::SizeGuard(_)) => 4,
            CliError::Core(_) | CliError::Contract(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}
