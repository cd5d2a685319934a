use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or configuration parameter is out of its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The observed transmitter count has (numerically) zero probability
    /// under the current belief.
    #[error("observation has zero likelihood under the current belief")]
    ZeroEvidence,

    /// A numerical solver did not reach its residual target.
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
