use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation (zero inverse, repeated node, ...).
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// An input exceeds a configured capacity.
    #[error("size error: {0}")]
    Size(String),
    /// The caller violated an operation's contract.
    #[error("usage error: {0}")]
    Usage(String),
    /// A serialized object could not be parsed.
    #[error("decode error: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
