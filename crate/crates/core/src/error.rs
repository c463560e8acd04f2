use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("plane normal has (near) zero length")]
    ZeroNormal,

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("plane passes within {eps} m of the optical center (offset {offset})")]
    DegeneratePlane { offset: f64, eps: f64 },

    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("layer depths must be strictly increasing (layer {index})")]
    NonMonotoneDepths { index: usize },

    #[error("point set is degenerate for plane fitting ({0})")]
    Degenerate(&'static str),

    #[error("scene has no valid depth")]
    EmptyScene,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("unknown scene `{0}` (expected box, corridor or random(k, seed))")]
    UnknownScene(String),

    #[error("empty input")]
    EmptyInput,

    #[error("mask selects no pixels")]
    EmptyMask,

    #[error("image is {width}x{height}, needs at least {min} pixels per side")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("prediction and ground truth share no valid pixels")]
    NoOverlap,

    #[error("unsupported container version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("corrupt manifest: {0}")]
    CorruptManifest(String),

    #[error("missing layer for proxy {index}: {path}")]
    MissingLayer { index: usize, path: PathBuf },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
