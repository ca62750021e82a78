use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("interval [{start}, {end}] out of bounds for trajectory of length {len}")]
    Index { start: usize, end: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("rank table too large: {entries} entries exceeds cap {cap}")]
    TooLarge { entries: u64, cap: u64 },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),
    #[error("unknown algorithm: {0}")]
    UnknownAlgo(String),
    #[error("policy mismatch: {0}")]
    PolicyMismatch(String),
    #[error("episode already finished")]
    EpisodeFinished,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
