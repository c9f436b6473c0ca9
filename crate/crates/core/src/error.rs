use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too small: n = {n}, {what} requires n >= {required}")]
    InstanceTooSmall {
        n: usize,
        required: usize,
        what: &'static str,
    },

    #[error("no valid index tuples: n = {n} admits no {what}")]
    NoValidTuples { n: usize, what: String },

    #[error("exhaustive sum refused: {0}")]
    NaiveGuard(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
