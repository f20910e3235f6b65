use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad files, arguments or point sets supplied by the caller.
    Input,
    /// The numerics broke down (non-positive radius, singular solve, ...).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve parameter {t} outside [0, {n}]")]
    ParameterOutOfRange { t: f64, n: usize },

    #[error("a spline needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("expected {expected} control points for {nodes} nodes, got {got}")]
    ControlPointCount {
        nodes: usize,
        expected: usize,
        got: usize,
    },

    #[error("constrained node {node} outside [0, {n}]")]
    ConstraintOutOfRange { node: usize, n: usize },

    #[error("constrained nodes {first} and {second} need at least one free node between them")]
    ConstraintSpacing { first: usize, second: usize },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image is not 8-bit grayscale (found {0})")]
    NotGrayscale(String),

    #[error("corrupt image: {0}")]
    CorruptImage(String),

    #[error("pixel values must lie in [0, 1]; found {0}")]
    PixelRange(f64),

    #[error("image dimensions {width}x{height} do not match {len} pixels")]
    ImageShape {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("mask dimensions differ: {0:?} vs {1:?}")]
    MaskSizeMismatch((usize, usize), (usize, usize)),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("point {index} at ({x}, {y}) lies outside the {width}x{height} image")]
    PointOutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("non-positive radius {r} at t = {t}")]
    NonPositiveRadius { t: f64, r: f64 },

    #[error("direction is not unit length (norm {0})")]
    DirectionNotUnit(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective returned a non-finite value")]
    NonFiniteObjective,

    #[error("singular tridiagonal system")]
    SingularSystem,

    #[error("invalid synthetic shape: {0}")]
    InvalidShape(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonPositiveRadius { .. }
            | Error::DirectionNotUnit(_)
            | Error::NonFiniteObjective
            | Error::SingularSystem
            | Error::ParameterOutOfRange { .. }
            | Error::DimensionMismatch { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
