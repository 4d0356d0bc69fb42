use thiserror::Error;

/// Errors produced by pricing and estimation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar input violated its domain (non-positive vol, negative
    /// duration and the like).
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A barrier schedule violated ordering or overlap constraints.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// A numerical procedure could not deliver a trustworthy result
    /// (ill-conditioned system, overflow in an intermediate quantity).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Inputs that are individually valid but mutually inconsistent,
    /// e.g. a moment vector that cannot come from a probability law.
    #[error("inconsistent inputs: {0}")]
    Inconsistency(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
