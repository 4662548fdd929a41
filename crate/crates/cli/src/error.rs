use std::io;

use streamrank::Error;

/// Process exit status: 2 for bad input or usage, 1 for anything else.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let internal = match &e {
            Error::Divergence { .. } | Error::EmptyBatch => true,
            Error::Io(io) => !matches!(
                io.kind(),
                io::ErrorKind::NotFound
                    | io::ErrorKind::PermissionDenied
                    | io::ErrorKind::InvalidData
                    | io::ErrorKind::UnexpectedEof
            ),
            _ => false,
        };
        if internal {
            CliError::Internal(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

/// Failures writing our own outputs.
pub fn output(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Internal(format!("{context}: {e}"))
}

pub type CliResult<T> = Result<T, CliError>;
