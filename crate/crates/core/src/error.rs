use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({0:.3}, {1:.3}, {2:.3}) mm is outside the sampleable region")]
    OutOfBounds(f64, f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid phantom spec: {0}")]
    SpecInvalid(String),
    #[error("seed voxel {index:?} has {hu:.1} HU, below the lumen threshold {threshold:.1}")]
    SeedBelowThreshold {
        index: [usize; 3],
        hu: f64,
        threshold: f64,
    },
    #[error("no path between the seed voxels")]
    NoPath,
    #[error("polyline of length {length:.3} mm is shorter than the step {step:.3} mm")]
    TooShort { length: f64, step: f64 },
    #[error("degenerate path: coincident consecutive points at index {0}")]
    DegeneratePath(usize),
    #[error("contour center has {hu:.1} HU, below the lumen threshold {threshold:.1}")]
    CenterBelowThreshold { hu: f64, threshold: f64 },
    #[error("contour stacks do not share geometry: {0}")]
    GeometryMismatch(String),
    #[error("cannot triangulate stack: {0}")]
    DegenerateStack(String),
    #[error("mesh is not watertight: {0}")]
    NonWatertight(String),
    #[error("mask grids do not match")]
    GridMismatch,
    #[error("mask is empty")]
    EmptyMask,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("reference mask has no surface voxels")]
    EmptyReference,
    #[error("both masks are empty")]
    BothEmpty,
    #[error("slice {index} out of range for axis of length {len}")]
    SliceOutOfRange { index: usize, len: usize },
    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            what,
            msg: msg.into(),
        }
    }

    /// Process exit code: 3 for invalid configuration, 2 for file errors,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParam(_) | Error::SpecInvalid(_) => 3,
            e if e.is_io() => 2,
            _ => 1,
        }
    }

    /// True for errors caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format { .. } | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
