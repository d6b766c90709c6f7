use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("empty normalization region")]
    EmptyRegion,

    #[error("degenerate normalization region")]
    DegenerateNormalization,

    #[error("zero vector on classification region")]
    ZeroVector,

    #[error("normalization and classification regions overlap")]
    OverlappingRegions,

    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("degenerate histogram")]
    DegenerateHistogram,

    #[error("empty mask after slice restriction")]
    EmptyAfterRestriction,

    #[error("invalid phantom spec: {0}")]
    InvalidSpec(String),

    #[error("invalid design matrix: {0}")]
    InvalidDesign(String),

    #[error("sample {sample}: {source}")]
    Sample {
        sample: String,
        #[source]
        source: Box<Error>,
    },

    #[error("solver did not converge after {iterations} iterations (KKT residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("stratification failed")]
    StratificationFailed,

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),

    #[error("mismatched run counts: {0}")]
    MismatchedRuns(String),

    #[error("feature-to-voxel map collision at voxel {0}")]
    MapCollision(usize),

    #[error("region index {index} outside feature space of size {size}")]
    RegionOutOfRange { index: usize, size: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
