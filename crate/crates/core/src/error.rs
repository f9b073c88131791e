use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// The input does not look like the expected file format.
    #[error("format error: {0}")]
    Format(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("popularity profile has no cacheable requests")]
    EmptyProfile,

    /// No object was requested twice, so `M = 0` and the exponent estimator has no meaning.
    #[error("Zipf exponent undefined: no object requested at least twice (M = 0)")]
    UndefinedExponent,

    #[error("profiles cover overlapping windows")]
    OverlappingWindows,

    #[error("records out of time order at index {index}: {timestamp} < {previous}")]
    Unordered {
        index: usize,
        timestamp: f64,
        previous: f64,
    },

    #[error("quadrature did not converge: estimated relative error {achieved:e} after {subdivisions} subdivisions")]
    Quadrature { achieved: f64, subdivisions: usize },

    #[error("empty configuration list")]
    NoConfigs,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input data rather than internal failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Quadrature { .. })
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io(e),
            other => Error::Format(format!("{other:?}")),
        }
    }
}
