//! Command failures and their exit codes.

use std::fmt;

use dfgof_core::Error as CoreError;

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Malformed or inconsistent input.
pub const EXIT_INPUT: i32 = 2;
/// A numerical procedure failed.
pub const EXIT_NUMERIC: i32 = 3;
/// Reading or writing files failed.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoConvergence { .. }
            | CoreError::NoBracket { .. }
            | CoreError::DegenerateScore(_)
            | CoreError::DegenerateGeometry(_)
            | CoreError::NonOrthogonalInputs { .. }
            | CoreError::DegenerateModel { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
