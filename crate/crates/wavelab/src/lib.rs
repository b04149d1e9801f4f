//! Experiment harness around the core modulation/water-wave library.
//!
//! The library side of the command-line tool: configuration ingestion
//! ([`config`]), deterministic CSV emission ([`csvout`]), flat binary field
//! snapshots ([`fieldio`]), and the experiment drivers ([`experiments`]) that
//! produce dispersion tables, resonance scans, simulation snapshots, residual
//! studies, and the convergence study of the modulation approximation.

pub mod config;
pub mod csvout;
pub mod experiments;
pub mod fieldio;

pub use config::{load_config, load_str, ExperimentConfig};

/// Harness-level failure: configuration, IO, or a core solver error.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Configuration text failed to parse.
    #[error("config line {line}: {message}")]
    Parse {
        /// 1-based line number, 0 when the whole file is at fault.
        line: usize,
        /// Human-readable description.
        message: String,
    },
    /// A key that no section defines.
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    /// A key with an out-of-range or malformed value.
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue {
        /// Offending key.
        key: String,
        /// Human-readable description.
        message: String,
    },
    /// Filesystem failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Error propagated from the core library.
    #[error("{0}")]
    Wave(wavecore::WaveError),
}

impl From<wavecore::WaveError> for HarnessError {
    fn from(e: wavecore::WaveError) -> HarnessError {
        HarnessError::Wave(e)
    }
}

impl HarnessError {
    /// Process exit code: 2 for violated run gates, 3 for numerical aborts,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Wave(wavecore::WaveError::DepthViolation { .. })
            | HarnessError::Wave(wavecore::WaveError::HyperbolicityViolation { .. })
            | HarnessError::Wave(wavecore::WaveError::NearResonance { .. }) => 2,
            HarnessError::Wave(wavecore::WaveError::NumericalAbort { .. }) => 3,
            _ => 1,
        }
    }
}
