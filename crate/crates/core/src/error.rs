use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library.
///
/// Learner failures (a mis-set noise bound emptying the version space, a
/// refining pass running out of budget, an exhausted stream) are grouped
/// under [`Error::Failure`] so callers can treat them as an unsuccessful run
/// rather than a bug.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain mismatch: expected {expected} points, got {actual}")]
    DomainMismatch { expected: usize, actual: usize },

    #[error("label {label} outside 1..={k}")]
    LabelOutOfRange { label: u32, k: u32 },

    #[error("empirical error undefined on an empty sample")]
    EmptySample,

    #[error("position {position} out of bounds for a stream of length {len}")]
    PositionOutOfBounds { position: usize, len: usize },

    #[error("query set contains position {0} more than once")]
    DuplicatePosition(usize),

    #[error("brute-force guard exceeded: {0}; supply the known dimension instead")]
    GuardExceeded(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("learner failure: {0}")]
    Failure(#[from] Failure),
}

/// Ways a learning run can fail without the library being at fault.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Failure {
    #[error("version space emptied during {stage} (noise bound set too low?)")]
    VersionSpaceEmptied { stage: &'static str },

    #[error("refining labeled {labeled} of {required} points before its budget ran out")]
    Incomplete { labeled: usize, required: usize },

    #[error("stream exhausted: needed {needed} more points, {available} available")]
    StreamExhausted { needed: usize, available: usize },

    #[error("no parameter setting ran to completion ({0})")]
    NoCompletion(String),

    #[error("{0}")]
    Injected(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub fn is_failure(&self) -> bool {
        matches!(self, Error::Failure(_))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
