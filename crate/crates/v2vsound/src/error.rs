use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] v2vsound_core::Error),
    /// Config text failed to parse as TOML or did not match the schema.
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// Parsed config is inconsistent; `key` is the path to the offending key.
    #[error("{key}: {message}")]
    Semantic { key: String, message: String },
    #[error("no scenario file or preset named '{0}'")]
    UnknownScenario(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl Error {
    pub fn semantic(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Semantic {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Semantic { .. } | Error::UnknownScenario(_) | Error::Usage(_) => 1,
            Error::Core(_) | Error::Validation(_) => 2,
            Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => 3,
        }
    }
}
