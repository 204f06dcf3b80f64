use thiserror::Error;

use crate::gf2m::FieldElement;

pub type Result<T> = std::result::Result<T, GddError>;

#[derive(Debug, Error)]
pub enum GddError {
    #[error("extension degree m = {m} is outside the supported range {min}..={max}")]
    DegreeOutOfRange { m: u32, min: u32, max: u32 },

    #[error("modulus {modulus:#x} must have degree {m} and a nonzero constant term")]
    MalformedModulus { modulus: u64, m: u32 },

    #[error("modulus {modulus:#x} is reducible over GF(2)")]
    ReducibleModulus { modulus: u64 },

    #[error("element {bits:#x} does not belong to GF(2^{m})")]
    ElementOutOfField { bits: u64, m: u32 },

    #[error("the zero element has no discrete logarithm")]
    ZeroHasNoLog,

    #[error("block size k = {k} is out of range for m = {m}: {reason}")]
    BlockSizeOutOfRange {
        k: usize,
        m: u32,
        reason: &'static str,
    },

    #[error("invalid pair {{{u}, {v}}}: {reason}")]
    InvalidPair {
        u: FieldElement,
        v: FieldElement,
        reason: &'static str,
    },

    #[error("blocks have mixed sizes ({expected} and {found})")]
    MixedBlockSizes { expected: usize, found: usize },

    #[error("design does not match its universe: {0}")]
    UniverseMismatch(String),

    #[error("cannot parse field element {0:?}")]
    ParseElement(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
