use thiserror::Error;

/// Errors raised by the engine. Each variant carries enough text to be shown to a user as is.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank deficient")]
    RankDeficient,
    #[error("zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("budget exceeded after {0} reductions")]
    BudgetExceeded(u64),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("not pointed")]
    NotPointed,
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
