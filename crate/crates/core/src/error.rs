use thiserror::Error;

/// Errors raised by the library. Capacity errors are kept distinct so the
/// command line can map them to their own exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("edge index {index} out of range (m = {m})")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("wrong arity: {0}")]
    Arity(String),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "lanczos did not converge after {iterations} iterations \
         (best ritz value {ritz_value}, residual {residual})"
    )]
    NotConverged {
        iterations: usize,
        ritz_value: f64,
        residual: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("certificate mismatch: {0}")]
    Certificate(String),

    #[error("empty instance")]
    EmptyInstance,
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
