use thiserror::Error;

/// Errors raised by the numeric kernel, the series machinery and the inverter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (log of zero, Im(tau) <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A result exponent left the representable range.
    #[error("exponent range exceeded: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A coefficient was requested at or beyond the truncation order of a series.
    #[error("coefficient of q^{index} requested but the series is only known below q^{trunc}")]
    Truncated { index: i64, trunc: i64 },

    /// All significant bits of a floating coefficient cancelled.
    #[error("precision exhausted at a({index}): {bits_lost} bits cancelled with {precision} available; raise the precision or use exact mode")]
    Precision {
        index: usize,
        bits_lost: i64,
        precision: u32,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// An invariant that must hold for correct code was violated.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
