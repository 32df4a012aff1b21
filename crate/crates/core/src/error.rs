use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("rejected: {0}")]
    Rejected(String),
    /// Input lies outside the supported regime (e.g. class number > 1).
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    /// A bounded search or truncation ran out of room.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A numerical determination was ambiguous or ill-conditioned.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn reject<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Rejected(msg.into()))
}
