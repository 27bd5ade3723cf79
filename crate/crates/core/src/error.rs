use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: bad weights, out-of-range parameters, oversized frames.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("frame mismatch: operands live on different frames")]
    FrameMismatch,

    #[error("zero total mass")]
    ZeroMass,

    #[error("conditioning on null event")]
    NullEvent,

    #[error("empty knowledge set")]
    EmptySet,

    #[error("event impossible under K")]
    EventImpossible,

    #[error("event possibly null; pass allow_boundary")]
    EventPossiblyNull,

    #[error("total conflict between mass functions")]
    TotalConflict,

    #[error("unsupported score rule: {0}")]
    UnsupportedRule(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
