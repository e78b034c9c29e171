use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient sample: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("paired sample length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid intensity at index {index}: values must be finite and nonnegative")]
    InvalidIntensity { index: usize },

    #[error("degenerate channel: zero variance")]
    DegenerateChannel,

    #[error("zero total intensity")]
    ZeroTotalIntensity,

    #[error("degenerate histogram: all values identical")]
    DegenerateHistogram,

    #[error("no admissible thresholds")]
    NoAdmissibleThresholds,

    #[error("sample too small: need n >= {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("threshold grid does not match a sample of size {n}")]
    GridMismatch { n: usize },

    #[error("block size {block_size} does not fit a {width}x{height} image")]
    BlockTooLarge {
        block_size: usize,
        width: usize,
        height: usize,
    },

    #[error("channel dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("replicate {index} failed: {source}")]
    ReplicateFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
