use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid set descriptor `{name}`: {message}")]
    Validation { name: String, message: String },

    #[error("unknown builtin set `{0}`")]
    UnknownBuiltin(String),

    #[error("set `{name}` has no known prime density; supply one explicitly (--delta)")]
    MissingDelta { name: String },

    #[error("{what} = {value} exceeds the supported bound {bound}")]
    Capacity { what: &'static str, value: u64, bound: u64 },

    #[error("argument {what} = {value} outside the domain: {expected}")]
    Domain {
        what: &'static str,
        value: String,
        expected: &'static str,
    },

    #[error("backing tau table for q = {q} covers n <= {bound}, but n = {n} was requested")]
    BackingBound { q: u64, bound: u64, n: u64 },

    #[error("integer {n} cannot be factored within the trial-division bound")]
    FactorizationBound { n: u64 },

    #[error("invalid discriminant {d}: {reason}")]
    Discriminant { d: i64, reason: &'static str },

    #[error("series did not reach tolerance {tolerance:e} ({context}); best error estimate {achieved:e}")]
    NonConvergence {
        context: &'static str,
        tolerance: f64,
        achieved: f64,
    },

    #[error("quadrature failed on [{a}, {b}]: {reason}")]
    Quadrature { a: f64, b: f64, reason: String },

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl ToString, expected: &'static str) -> Error {
        Error::Domain {
            what,
            value: value.to_string(),
            expected,
        }
    }
}
