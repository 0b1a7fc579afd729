use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown target id `{0}`")]
    UnknownTarget(String),

    #[error("time {t} s is before the first waypoint at {first} s")]
    BeforeFirstWaypoint { t: f64, first: f64 },

    #[error("geometry unobservable: {0}")]
    Unobservable(String),

    #[error("insufficient trace: {0}")]
    InsufficientTrace(String),

    #[error("index out of bounds: {0}")]
    OutOfBounds(String),

    #[error("timestamps are not monotone: {0}")]
    NonMonotone(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
