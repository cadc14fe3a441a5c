use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("surface schema violation: {0}")]
    Schema(String),

    #[error("index {m} is not in I(S) = {index_set:?}")]
    IndexNotInSet { m: usize, index_set: Vec<usize> },

    #[error("point {0} lies outside the admissible domain: {1}")]
    Domain(String, String),

    #[error("certificate does not pass: {0}")]
    NotCertified(String),

    #[error("no admissible radius: {0}")]
    NoRadius(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("malformed JSON at {path}:{line}:{column}: {message}")]
    Json { path: String, line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn domain(z: num_complex::Complex64, why: impl Into<String>) -> Self {
        Error::Domain(format!("{z}"), why.into())
    }
}
