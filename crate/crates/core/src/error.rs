use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: non-finite entries, empty data, wrong tag/input pairing.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("index {index} out of range 1..={bound}")]
    Index { index: usize, bound: usize },
    /// Exponent or parameter outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),
    #[error("fit error: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
