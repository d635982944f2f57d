//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point counts differ: {left} vs {right}")]
    CountMismatch { left: usize, right: usize },

    #[error("need at least 3 control points, got {count}")]
    TooFewPoints { count: usize },

    #[error("degenerate control points: pivot {pivot:.3e} below threshold {threshold:.1e}")]
    DegenerateConfiguration { pivot: f64, threshold: f64 },

    #[error("source points {first} and {second} coincide (distance {distance:.3e} px)")]
    DuplicatePoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },

    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },

    #[error("channel count mismatch: {left} vs {right}")]
    ChannelMismatch { left: u8, right: u8 },

    #[error("invalid channel count {0} (expected 1 or 3)")]
    InvalidChannels(u8),

    #[error("sample buffer holds {actual} values, expected {expected}")]
    SampleCount { expected: usize, actual: usize },

    #[error("sample {index} is {value}, outside [0, 1]")]
    SampleRange { index: usize, value: f64 },

    #[error("image too small: {width}x{height} (minimum {minimum}x{minimum})")]
    TooSmall {
        width: u32,
        height: u32,
        minimum: u32,
    },

    #[error("layout point {index} lies outside the frame")]
    OutOfFrame { index: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("predictor failure: {0}")]
    PredictorFailure(String),

    #[error("parse error at byte {offset}: {message}")]
    ParseError { offset: usize, message: String },

    #[error("schema error: field `{field}` {reason}")]
    SchemaError { field: String, reason: String },

    #[error("bad flow file magic (expected the little-endian f32 202021.25)")]
    BadMagic,

    #[error("flow file size mismatch: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image decode error: {0}")]
    DecodeError(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
