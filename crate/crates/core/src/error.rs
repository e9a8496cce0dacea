use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("singular kernel evaluation: {0}")]
    Singular(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("accuracy target not reached: {0}")]
    Accuracy(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
