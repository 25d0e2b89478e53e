use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {context} at t = {time}")]
    NonFinite { context: &'static str, time: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("covariance matrix is not positive semidefinite (pivot {index} = {pivot:e})")]
    NotPositiveSemidefinite { index: usize, pivot: f64 },

    #[error("kernel {0} has no exponential (Riccati) form")]
    NotOuForm(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
