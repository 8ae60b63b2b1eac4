use std::path::PathBuf;

use serde::Serialize;

/// Everything a command can fail with. Each variant maps to an exit code
/// and a machine-readable `kind`.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("model file not found: {}", .0.display())]
    ModelNotFound(PathBuf),
    #[error("input not found: {}", .0.display())]
    InputNotFound(PathBuf),
    #[error("corrupt data in {}: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Pipeline(String),
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::ModelNotFound(_) => "ModelNotFound",
            CliError::InputNotFound(_) => "InputNotFound",
            CliError::Corrupt { .. } => "DataCorrupt",
            CliError::Io { .. } => "IoError",
            CliError::Pipeline(_) => "PipelineError",
        }
    }

    /// 1 usage, 2 missing input, 3 corrupt data; I/O and pipeline
    /// failures also exit with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ModelNotFound(_) | CliError::InputNotFound(_) => 2,
            CliError::Corrupt { .. } => 3,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Pipeline(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson { error: self.kind(), message: self.to_string() }).expect("error json")
    }

    pub fn corrupt(path: impl Into<PathBuf>, message: impl ToString) -> CliError {
        CliError::Corrupt { path: path.into(), message: message.to_string() }
    }

    /// Maps a read failure to `missing` when the file does not exist.
    pub fn read(path: impl Into<PathBuf>, e: std::io::Error, missing: fn(PathBuf) -> CliError) -> CliError {
        let path = path.into();
        if e.kind() == std::io::ErrorKind::NotFound {
            missing(path)
        } else {
            CliError::Io { path, source: e }
        }
    }

    pub fn io(path: impl Into<PathBuf>, e: std::io::Error) -> CliError {
        CliError::Io { path: path.into(), source: e }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
