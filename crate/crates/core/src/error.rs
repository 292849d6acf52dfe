use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    Shape { left: String, right: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("class id conflict: {0}")]
    Conflict(String),

    #[error("empty class: {0}")]
    EmptyClass(String),

    #[error("degenerate head: {0}")]
    DegenerateHead(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("stage plan error: {0}")]
    Plan(String),

    #[error("label mapping error: {0}")]
    Mapping(String),

    #[error("unsupported model format version {found:?} (expected {expected:?})")]
    Version { found: String, expected: &'static str },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn shape(left: impl Into<String>, right: impl Into<String>) -> Self {
        Error::Shape {
            left: left.into(),
            right: right.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 data, 4 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Version { .. } | Error::Json(_) => 2,
            Error::Io { .. } | Error::Parse { .. } | Error::Plan(_) | Error::Mapping(_) => 3,
            Error::Stage { source, .. } => match source.exit_code() {
                2 | 3 => source.exit_code(),
                _ => 4,
            },
            _ => 4,
        }
    }
}
