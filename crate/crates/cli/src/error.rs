use std::fmt;
use std::io;

use thiserror::Error;

/// Position and reason of a rejected config line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    #[error("{phase}: {source}")]
    Numerical {
        phase: &'static str,
        #[source]
        source: relbundle_core::Error,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("{failed} invariant check(s) failed")]
    Invariant { failed: usize },

    #[error("unknown suite `{name}`; available suites: {available}")]
    UnknownSuite { name: String, available: String },
}

impl CliError {
    /// 0 success, 1 invariant failure, 2 config error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant { .. } => 1,
            CliError::Config(_) | CliError::UnknownSuite { .. } => 2,
            CliError::Numerical { .. } | CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

/// Attaches a run phase to core errors.
pub(crate) trait Phase<T> {
    fn phase(self, phase: &'static str) -> Result<T, CliError>;
}

impl<T> Phase<T> for relbundle_core::Result<T> {
    fn phase(self, phase: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { phase, source })
    }
}
