use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{what} supports at most {limit} vertices, got {n}")]
    SizeLimit { what: &'static str, n: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    /// Retry budget exhausted while a clique minor kept being found. Carries the
    /// last model as evidence that the caller's expansion promise does not hold.
    #[error("clique minor K_{h} found at depth {depth} after {attempts} attempts; expansion promise violated")]
    ExpansionPromiseViolated {
        h: usize,
        depth: usize,
        attempts: usize,
        witness: crate::minor::BranchModel,
    },

    #[error("separator of order {order} exceeds the requested bound {bound:.3}")]
    BoundExceeded { order: usize, bound: f64 },

    #[error("internal limit reached: {0}")]
    InternalLimit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn size_limit(what: &'static str, n: usize, limit: usize) -> Self {
        Error::SizeLimit { what, n, limit }
    }
}
