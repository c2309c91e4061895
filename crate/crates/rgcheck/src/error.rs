use thiserror::Error;

/// Failures of the command-line layer, each mapped to an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema violation at '{pointer}': {message}")]
    SchemaViolation { pointer: String, message: String },

    #[error("unknown inequality id '{id}' at '{pointer}'")]
    UnknownInequalityId { id: String, pointer: String },

    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Engine(#[from] riccikit::Error),

    #[error("report serialization failed: {0}")]
    Serialization(String),
}

impl CliError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self::SchemaViolation { pointer: pointer.into(), message: message.into() }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Self::IoFailure { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SchemaViolation { .. } | CliError::UnknownInequalityId { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
