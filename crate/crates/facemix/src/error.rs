//! Crate-wide error type.

use std::path::PathBuf;

use crate::landmarks::FacialComponent;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    MalformedJson(#[from] serde_json::Error),

    #[error("landmark file has {got} points, expected {expected}")]
    WrongPointCount { got: usize, expected: usize },

    #[error("landmark point {index} is not finite")]
    NonFinitePoint { index: usize },

    #[error("landmark point {index} at ({x}, {y}) is outside a {width}x{height} image")]
    PointOutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },

    #[error("degenerate region for {component:?}: {reason}")]
    DegenerateRegion {
        component: FacialComponent,
        reason: String,
    },

    #[error("image dimension mismatch: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: u32,
        a_height: u32,
        b_width: u32,
        b_height: u32,
    },

    #[error("rectangle ({x0},{y0})-({x1},{y1}) out of bounds for {width}x{height} image")]
    RectOutOfBounds {
        x0: u32,
        y0: u32,
        x1: u32,
        y1: u32,
        width: u32,
        height: u32,
    },

    #[error("vector length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("supplier and receiver labels must differ")]
    SameClassPair,

    #[error("invalid mix weights: W={w} must exceed {bound}")]
    InvalidWeights { w: f64, bound: f64 },

    #[error("dataset needs at least two distinct labels")]
    InsufficientClasses,

    #[error("sampling failed after {attempts} attempts: {what}")]
    SamplingFailure { what: String, attempts: usize },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("model file {path}: {reason}")]
    ModelFormat { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    /// Attach a path to an I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
