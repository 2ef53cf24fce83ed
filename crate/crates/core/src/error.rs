use thiserror::Error;

/// Errors produced by selection problems, mechanisms and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scores and sensitivities differ in length ({scores} vs {sensitivities})")]
    LengthMismatch { scores: usize, sensitivities: usize },

    #[error("selection problem needs at least one candidate")]
    Empty,

    #[error("sensitivity of candidate {index} is negative or not finite ({value})")]
    InvalidSensitivity { index: usize, value: f64 },

    #[error("score of candidate {index} is not finite ({value})")]
    InvalidScore { index: usize, value: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("random stopping exceeded the iteration cap of {cap}")]
    IterationCap { cap: u64 },

    #[error("{0}")]
    Config(String),

    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: u64, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }

    /// Whether the error originates from the file system or an output sink.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
