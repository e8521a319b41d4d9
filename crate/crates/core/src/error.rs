use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor extents do not line up for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The caller violated an operation precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data is out of range for the structure it is applied to.
    #[error("data error: {0}")]
    Data(String),

    /// A computation produced a non-finite or degenerate value.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("model error: {0}")]
    Model(String),

    /// A file was read successfully but failed validation.
    #[error("load error: {0}")]
    Load(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A pluggable component returned output that breaks its interface contract.
    #[error("contract error: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Malformed JSON, reported with the line it failed on.
    pub fn json_parse(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            message: e.to_string(),
        }
    }
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
