use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("argument {x} outside the supported domain {domain}")]
    DomainError { x: f64, domain: &'static str },

    #[error("no oscillation found in trace: {0}")]
    NoOscillation(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("matrix is not block decomposable: inter-block coupling {coupling:e} exceeds {bound:e}")]
    NotBlockDecomposable { coupling: f64, bound: f64 },

    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("degenerate group collides with neighbouring level: gap {gap:e} < {required:e}")]
    DegeneracyCollision { gap: f64, required: f64 },

    #[error("gauge alignment failed: overlap {0} below 0.9")]
    GaugeAlignmentFailure(f64),

    #[error("integration unstable: norm drift {0:e}")]
    IntegrationUnstable(f64),

    #[error("population leaked out of the driven block: {0:e}")]
    BlockLeakage(f64),

    #[error("fitted frequency {omega} is below |detuning| {delta}")]
    InconsistentFit { omega: f64, delta: f64 },

    #[error("non-finite sample at ({0}, {1})")]
    InvalidSample(f64, f64),

    #[error("model is gapless: minimum gap {0:e}")]
    GaplessModel(f64),

    #[error("metric determinant is negative: {0:e}")]
    MetricInconsistent(f64),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
