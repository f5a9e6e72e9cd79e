use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by table construction, transforms and analyses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("player count {n} exceeds the limit of {max}")]
    TooManyPlayers { n: usize, max: usize },

    #[error("a player set needs at least one player")]
    NoPlayers,

    #[error("mask {mask:#b} is out of range for n = {n}")]
    MaskOutOfRange { mask: u64, n: usize },

    #[error("table for n = {n} needs {expected} entries, got {found}")]
    IncompleteTable {
        n: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate entry for mask {mask}")]
    DuplicateMask { mask: u64 },

    #[error("non-finite value at mask {mask}")]
    NonFinite { mask: u64 },

    #[error("arity mismatch: expected n = {expected}, found n = {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("reference transform refused for n = {n} (limit {max})")]
    ReferenceTooLarge { n: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("similarity undefined: both concept vectors are zero")]
    UndefinedSimilarity,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed table file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
