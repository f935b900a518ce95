use thiserror::Error;

/// Errors produced by filter construction, mutation and the analytics helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exhausted: {0}")]
    CapacityExhausted(String),

    #[error("insert rejected: {0}")]
    Insert(#[from] InsertError),

    #[error("decode error: {0}")]
    Decode(#[from] DecodeError),

    #[error("operation not supported by {0} filters")]
    Unsupported(&'static str),

    #[error("false negative detected for inserted element #{0}")]
    FalseNegative(u64),
}

/// Why a filter refused an element.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum InsertError {
    /// Every slot the element may occupy is taken and displacement failed.
    #[error("filter is full")]
    Full,
    /// The bucket pair already holds the maximum number of copies of the fingerprint.
    #[error("duplicate fingerprint bound reached")]
    DuplicateBound,
    /// A fuzzy-folded filter cannot shrink its active sub-filters any further.
    #[error("no room left to fold")]
    CapacityExhausted,
}

/// Failures while reading the binary filter format.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown filter kind byte 0x{0:02x}")]
    UnknownKind(u8),
    #[error("truncated input: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("invalid field: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
