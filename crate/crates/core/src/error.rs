use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing parameter `{field}` required by {context}")]
    MissingParameter { field: &'static str, context: &'static str },

    #[error("non-positive rate {rate} in transition list")]
    NonPositiveRate { rate: f64 },

    #[error("explosion guard: more than {cap} jumps before t = {t_end}")]
    Explosion { cap: u64, t_end: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("time {time} is outside the profile range [{start}, {end}]")]
    TimeOutOfRange { time: f64, start: f64, end: f64 },

    #[error("drift matrix is defective (repeated eigenvalue {0})")]
    DefectiveMatrix(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
