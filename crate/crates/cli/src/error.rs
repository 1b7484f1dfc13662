//! CLI error taxonomy with machine-readable categories and exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse { .. } => "parse",
            CliError::Io { .. } => "io",
            CliError::Numeric(_) => "numeric",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Numeric(_) => 5,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_stderr_json(&self) -> String {
        format!(
            "{{\"category\":{},\"message\":{}}}",
            serde_json::to_string(self.category()).unwrap(),
            serde_json::to_string(&self.to_string()).unwrap()
        )
    }
}

impl From<taustep_core::Error> for CliError {
    fn from(err: taustep_core::Error) -> Self {
        match err {
            taustep_core::Error::NonFiniteQuadrature { .. } => CliError::Numeric(err.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}
