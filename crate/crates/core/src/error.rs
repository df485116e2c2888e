use thiserror::Error;

/// Errors produced by filter, gain, signal, and steady-state operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// Two vectors that must share a length did not.
    #[error("length mismatch in {context}: expected {expected}, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A parameter was outside its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation that requires a nonzero vector received all zeros.
    #[error("{context} requires a nonzero vector")]
    ZeroVector { context: &'static str },

    /// The steady-state fixed-point iteration found no finite solution.
    #[error("no steady-state fixed point: iteration diverged (last iterate {last_iterate:e})")]
    NoFixedPoint { last_iterate: f64 },

    /// The steady-state denominator was non-positive, so the predicted
    /// operating point is unstable and no EMSE is defined.
    #[error("unstable operating point: steady-state denominator {denominator:e} is not positive")]
    UnstableOperatingPoint { denominator: f64 },

    /// An averaging window exceeded the available trajectory length.
    #[error("averaging window ({window}) must be shorter than the trajectory ({available})")]
    WindowTooLarge { window: usize, available: usize },

    /// A serialized system description could not be parsed.
    #[error("malformed system file at line {line}: {reason}")]
    MalformedSystemFile { line: usize, reason: String },

    /// An underlying read or write failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
