use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EgpeError {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-side precondition was violated (e.g. an unnormalized field).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A linear solve broke down or failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, EgpeError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(EgpeError::Domain(msg.into()))
}
