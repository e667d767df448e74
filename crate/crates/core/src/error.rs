use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A syntax error in formula text, with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid formula: {0}")]
    InvalidFormula(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("channel `{channel}` at step {step}: value {value} outside [{min}, {max}]")]
    OutOfRange {
        channel: String,
        step: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("degenerate range for channel `{channel}`: max {max} must exceed min {min}")]
    DegenerateRange { channel: String, min: f64, max: f64 },

    #[error("formula needs {needed} samples from time {t} but the trace has {available}")]
    HorizonExceedsTrace {
        t: usize,
        needed: usize,
        available: usize,
    },

    #[error("the until operator has no quantitative semantics here")]
    UntilUnsupported,

    #[error("score {0} is outside [-1, 1]")]
    ScoreDomain(f64),

    #[error("input {index} component {component}: {value} outside [{min}, {max}]")]
    InputOutOfBox {
        index: usize,
        component: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("state {index} component {component}: {value} outside [{min}, {max}]")]
    StateOutOfBox {
        index: usize,
        component: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
