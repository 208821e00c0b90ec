use std::fmt;
use std::io;

/// Failures surfaced to the command line, each with a fixed exit code.
#[derive(Debug)]
pub enum CliError {
    /// Configuration or argument rejected; `path` locates the offending field.
    Validation {
        path: String,
        message: String,
    },
    /// A data container could not be decoded.
    Format(String),
    Io {
        path: String,
        source: io::Error,
    },
    Core(dtb_core::Error),
    /// A verification check ran but did not meet its tolerance.
    ChecksFailed(usize),
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::ChecksFailed(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation { path, message } => write!(f, "invalid configuration at `{path}`: {message}"),
            CliError::Format(msg) => write!(f, "format error: {msg}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dtb_core::Error> for CliError {
    fn from(e: dtb_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
