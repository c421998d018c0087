use thiserror::Error;

use crate::dynamics::FlowState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degree overflow: degree {degree} exceeds the cap of {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("degree overflow at step {step}: degree {degree} exceeds the cap of {cap}")]
    FlowDegreeOverflow { step: usize, degree: usize, cap: usize },

    /// Integration produced NaN or infinite entries; carries the last finite state.
    #[error("non-finite state at step {step} (t = {t}); integration aborted")]
    NonFinite {
        step: usize,
        t: f64,
        last_good: Box<FlowState>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
