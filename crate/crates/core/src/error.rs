use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty degree sequence")]
    EmptyDegreeSequence,

    #[error("empty distance list")]
    EmptyDistances,

    #[error("no valid edges in {path}")]
    NoValidEdges { path: PathBuf },

    #[error("no edges to bucket")]
    NoEdgesToBucket,

    #[error("too few snapshots: got {got}, need at least {need}")]
    TooFewSnapshots { got: usize, need: usize },

    #[error("insufficient data at every boundary")]
    InsufficientData,

    #[error("window [{start}, {start}+{length}) out of range for {available} snapshots")]
    WindowOutOfRange {
        start: usize,
        length: usize,
        available: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Config(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
