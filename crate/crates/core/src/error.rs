use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("mismatched discriminants {0} and {1}")]
    DiscriminantMismatch(i64, i64),
    #[error("degenerate form: discriminant {0} is a perfect square")]
    Degenerate(i64),
    #[error("bound undefined: {0}")]
    UndefinedBound(String),
    #[error("empty family")]
    EmptyFamily,
    #[error("cache format: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
