use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unsupported noise model: {0}")]
    UnsupportedNoise(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    #[error("missing problem metadata: {0}")]
    MissingMeta(&'static str),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error stems from user configuration rather than execution.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidProblem(_) | Error::UnsupportedNoise(_)
        )
    }
}
