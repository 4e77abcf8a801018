use thiserror::Error;

/// Failures reported by the numerical routines.
///
/// Soft outcomes (an inconclusive verdict, a nonconverged iteration) are
/// carried in the result types and never surface here.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("capacity exceeded: {what} has {count} entries (cap {cap})")]
    Capacity {
        what: &'static str,
        count: u128,
        cap: u128,
    },
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
