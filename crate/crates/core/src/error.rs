//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong at the library surface.
///
/// Each variant carries a stable kebab-case code (see [`Error::code`]) so
/// that callers emitting machine-readable output do not have to parse the
/// human-oriented message.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("m + n must be at least 1, got m={m}, n={n}")]
    InvalidDiagram { m: u32, n: u32 },

    #[error("enumerating C_{{{m},{n}}} needs {} bits, above the limit of {limit}", m + n)]
    EnumerationRangeExceeded { m: u32, n: u32, limit: u32 },

    #[error("edge index {index} out of range 1..={max}")]
    EdgeIndexOutOfRange { index: u32, max: u32 },

    #[error("invalid top set: {0}")]
    InvalidSubset(String),

    #[error("invalid edge path: {0}")]
    InvalidPath(String),

    #[error("the common degree is undefined for C_{{{m},{n}}}")]
    UndefinedDegree { m: u32, n: u32 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("unsupported diagram: {0}")]
    UnsupportedDiagram(String),

    #[error("series truncation orders or variable counts differ: {0}")]
    OrderMismatch(String),

    #[error("series power requires constant term 1")]
    NonUnitConstantTerm,

    #[error("cannot expand a product whose degree-zero power {0}/2 is not an integer")]
    HalfIntegerM1(String),

    #[error("invalid block decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("exponent too large for expansion: {0}")]
    ExponentOverflow(String),
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDiagram { .. } => "invalid-diagram",
            Error::EnumerationRangeExceeded { .. } => "enumeration-range-exceeded",
            Error::EdgeIndexOutOfRange { .. } => "edge-index-out-of-range",
            Error::InvalidSubset(_) => "invalid-subset",
            Error::InvalidPath(_) => "invalid-path",
            Error::UndefinedDegree { .. } => "undefined-degree",
            Error::InvalidRange(_) => "invalid-range",
            Error::UnsupportedDiagram(_) => "unsupported-diagram",
            Error::OrderMismatch(_) => "order-mismatch",
            Error::NonUnitConstantTerm => "non-unit-constant-term",
            Error::HalfIntegerM1(_) => "half-integer-m1",
            Error::InvalidDecomposition(_) => "invalid-decomposition",
            Error::ExponentOverflow(_) => "exponent-overflow",
        }
    }
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
