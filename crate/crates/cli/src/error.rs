use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    InvalidParameters(String),

    #[error(transparent)]
    Engine(#[from] nodalab::Error),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Module the failure belongs to.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Json(_) => "cli",
            CliError::InvalidParameters(_) => "model",
            CliError::Engine(e) => e.module(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::InvalidParameters(_) => "config-invalid",
            CliError::Engine(e) => e.kind(),
            CliError::Io { .. } => "io-failure",
            CliError::Json(_) => "serialization",
        }
    }

    /// Process exit status: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::InvalidParameters(_) => 2,
            _ => 1,
        }
    }

    pub fn record(&self, command: Option<&str>) -> ErrorRecord {
        ErrorRecord {
            status: "error",
            command: command.map(str::to_string),
            module: self.module(),
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

/// Machine-readable failure report, written as `error.json`.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub command: Option<String>,
    pub module: &'static str,
    pub kind: &'static str,
    pub message: String,
}
