//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stacked real vector must have even length, got {0}")]
    OddLength(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("operator mode does not match operand: {0}")]
    ModeMismatch(String),
    #[error("bad length: {0}")]
    BadLength(String),
    #[error("target conductance {target_s} S outside [{g_min_s}, {g_max_s}] S")]
    TargetOutOfRange {
        target_s: f64,
        g_min_s: f64,
        g_max_s: f64,
    },
    #[error(
        "programming did not converge after {pulses} pulses (residual {final_error:+.3e} relative)"
    )]
    NotConverged { pulses: u64, final_error: f64 },
    #[error("programming failed at cell ({row}, {col}): {source}")]
    ProgrammingFailure {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("singular linear system (pivot {pivot:.3e})")]
    SingularSystem { pivot: f64 },
    #[error("relaxation did not converge within {max_steps} steps (last update {last_update:.3e})")]
    NoConvergence { max_steps: u64, last_update: f64 },
    #[error("unsupported size {0} for this construction")]
    UnsupportedSize(usize),
    #[error("pilot matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("empty input to {0}")]
    EmptyInput(&'static str),
    #[error("ledger holds no analog events to summarize")]
    EmptyLedger,
    #[error("insufficient data for scaling fit: {0}")]
    InsufficientData(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }
}
