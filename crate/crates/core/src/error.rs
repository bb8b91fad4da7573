use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("vocabulary index {id} out of range for vocabulary of size {size}")]
    Vocabulary { id: u32, size: usize },

    #[error("unknown language tag `{0}`")]
    UnknownLabel(String),

    #[error("invalid language tag `{0}`: expected three lowercase ASCII letters or `html`")]
    InvalidLabel(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}: file is not valid UTF-8 (byte offset {offset})")]
    Encoding { path: PathBuf, offset: usize },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: bad magic bytes {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("model file: unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("model file truncated at byte offset {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },

    #[error("model file: size overflow at byte offset {offset}: {what}")]
    SizeOverflow { offset: usize, what: String },

    #[error("model file corrupt at byte offset {offset}: {message}")]
    Corrupt { offset: usize, message: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line front end.
    ///
    /// 1 is reserved for usage errors, which the argument parser reports itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}
