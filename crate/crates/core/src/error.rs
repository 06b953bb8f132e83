use thiserror::Error;

use crate::config::{ConfigError, ValidationReport};
use crate::schema::SchemaError;
use crate::serializer::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("mode kg needs an existing schema")]
    MissingSchema,
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
