//! Error classification for the exit-code contract:
//! 0 success, 2 config, 3 format, 4 numerical failure.

use std::fmt;

use tnpca_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Invalid parameters or incompatible inputs (exit 2).
    Config(String),
    /// Unreadable or malformed files (exit 3).
    Format(String),
    /// Numerical failure inside a computation (exit 4).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Format(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Format(_) => "format",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Format(m) | CliError::Numerical(m) => m,
        }
    }

    pub fn format(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Format(format!("{context}: {err}"))
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Config(_)
            | CoreError::Rank { .. }
            | CoreError::InsufficientData(_)
            | CoreError::ModeMismatch { .. }
            | CoreError::InvalidMode { .. }
            | CoreError::Shape(_)
            | CoreError::IndexOutOfRange { .. } => CliError::Config(e.to_string()),
            CoreError::Asymmetric { .. } => CliError::Format(e.to_string()),
            CoreError::NonFinite(_)
            | CoreError::Singular(_)
            | CoreError::UndefinedDirection(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Format(format!("io error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
