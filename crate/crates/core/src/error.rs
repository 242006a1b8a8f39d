use std::io;

use thiserror::Error;

/// Errors produced by the library. Every variant carries enough context to be
/// printed directly as a diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-monotone timestamps at line {line}")]
    NonMonotone { line: usize },

    #[error("bad magic: expected EVB1, found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("truncated input: expected {expected} bytes, {available} available")]
    Truncated { expected: usize, available: usize },

    #[error("declared event count {declared} does not match {actual} records in payload")]
    CountMismatch { declared: u64, actual: u64 },

    #[error("invalid polarity {0}, must be -1 or 1")]
    Polarity(i64),

    #[error("event {index} at ({x},{y}) outside {width}x{height} sensor")]
    OutOfBounds {
        index: usize,
        x: u32,
        y: u32,
        width: u32,
        height: u32,
    },

    #[error("events out of order at index {index}")]
    Unsorted { index: usize },

    #[error("geometry mismatch: {a_w}x{a_h} vs {b_w}x{b_h}")]
    Geometry {
        a_w: usize,
        a_h: usize,
        b_w: usize,
        b_h: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported image: {0}")]
    Image(String),

    #[error("empty event coverage: {0}")]
    EmptyCoverage(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
