use std::io;

use thiserror::Error;

/// Errors produced by the quantizer, the transforms and the container formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("distortion budget {budget} exceeds total source energy {energy}")]
    BudgetExceedsEnergy { budget: f64, energy: f64 },

    #[error("degenerate source: every variance is zero")]
    DegenerateSource,

    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for layer {layer} with {k} codewords")]
    IndexOutOfRange { layer: usize, index: u32, k: u32 },

    #[error("content hash mismatch")]
    HashMismatch,

    #[error("unknown format version {0}")]
    UnknownVersion(u16),

    #[error("unknown normal generator {0:?}")]
    UnknownGenerator(String),

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("stream truncated: {0}")]
    Truncated(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by a model/stream integrity violation rather
    /// than bad user input.
    pub fn is_integrity(&self) -> bool {
        matches!(
            self,
            Error::HashMismatch
                | Error::UnknownVersion(_)
                | Error::UnknownGenerator(_)
                | Error::BadMagic { .. }
                | Error::Truncated(_)
                | Error::IndexOutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
