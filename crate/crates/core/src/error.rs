use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or invalid input data.
    #[error("input error: {0}")]
    Input(String),
    /// The requested demand cannot be routed.
    #[error("demand infeasible: {0}")]
    DemandInfeasible(String),
    /// A structural invariant of the algorithm was violated; indicates a bug
    /// or a corrupted intermediate value.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}
