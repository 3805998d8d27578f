use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degradation error: {0}")]
    Degradation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("metric `{metric}`: {source}")]
    Metric {
        metric: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Failure tied to one named input (an image file, a domain).
    #[error("{name}: {source}")]
    Item {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn within(self, name: impl Into<String>) -> Error {
        Error::Item {
            name: name.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping metric/item context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Metric { source, .. } | Error::Item { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures in numeric evaluation or model execution, as opposed
    /// to bad input data or configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(self.root(), Error::Model(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
