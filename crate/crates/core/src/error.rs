use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("query and gold files are misaligned at line {line}: {queries} queries vs {gold} gold lines")]
    Misaligned { line: usize, queries: usize, gold: usize },

    #[error("line count mismatch: {predictions} prediction lines vs {gold} gold lines")]
    LineCountMismatch { predictions: usize, gold: usize },

    #[error("no negative candidates left for query {query:?} after excluding its gold hypernyms")]
    EmptyCandidatePool { query: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite {what} at epoch {epoch}, batch {batch} (parameter block {block})")]
    NonFinite {
        what: &'static str,
        epoch: usize,
        batch: usize,
        block: &'static str,
    },

    #[error("not a model file (bad magic bytes)")]
    BadMagic,

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u8),

    #[error("model file truncated or oversized: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },

    #[error("model checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
