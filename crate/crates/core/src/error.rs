use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("waveform sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("empty waveform")]
    EmptyWaveform,

    #[error("symbol {0} is not part of the alphabet")]
    UnknownSymbol(String),

    #[error("no amplitude level configured for symbol {0}")]
    MissingLevel(String),

    #[error("rate ratio {from} -> {to} is not an integer decimation factor")]
    UnsupportedRateRatio { from: f64, to: f64 },

    #[error("unsupported Bessel order {0} (supported: 1..=10)")]
    UnsupportedOrder(usize),

    #[error("response table: {0}")]
    Table(String),

    #[error("response is not evaluable at {freq_hz} Hz")]
    NotEvaluable { freq_hz: f64 },

    #[error("normalized intensity {0} outside [0, 1] beyond tolerance")]
    IntensityOutOfRange(f64),

    #[error("phase {0} rad outside [0, pi]")]
    PhaseOutOfRange(f64),

    #[error("normalization maximum {max} does not exceed DC offset {offset}")]
    DegenerateNormalization { max: f64, offset: f64 },

    #[error("alignment correlation {score:.3} below required confidence {required:.3}")]
    AlignmentFailed { score: f64, required: f64 },

    #[error("no baseline case (prev = 0) for lag {lag}, current symbol {cur}")]
    MissingBaseline { lag: usize, cur: String },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero-norm trace")]
    ZeroNorm,

    #[error("Stokes vector norm {norm} deviates from 1 by more than {tolerance}")]
    StokesNorm { norm: f64, tolerance: f64 },

    #[error("negative intensity {0}")]
    NegativeIntensity(f64),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("report has no data")]
    EmptyReport,

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than by
    /// the environment (I/O).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
