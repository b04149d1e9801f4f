//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveError {
    /// Grid construction violated an invariant (size, period, ...).
    InvalidGrid(String),
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// A multiplier symbol was not finite at a lattice point.
    SingularSymbol { k: [f64; 2] },
    /// A derivative of the dispersion function was requested at its
    /// non-smooth point `xi = 0`.
    SingularPoint,
    /// An argument was outside its admissible range.
    InvalidArgument(String),
    /// A harmonic denominator fell below the non-resonance gate.
    NearResonance { label: String, defect: f64 },
    /// The surface came too close to the bottom: `1 - eps*|zeta|_inf < h_min`.
    DepthViolation { margin: f64 },
    /// The strict-hyperbolicity gate failed: `min a < a0`.
    HyperbolicityViolation { min_a: f64 },
    /// A carrier wave vector does not sit on the micro lattice.
    Incommensurable(String),
    /// A non-finite value appeared during time integration.
    NumericalAbort { t: f64 },
    /// A required precomputed field was not supplied.
    MissingInput(String),
}

impl fmt::Display for WaveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveError::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            WaveError::GridMismatch => write!(f, "fields live on different grids"),
            WaveError::SingularSymbol { k } => {
                write!(f, "multiplier symbol not finite at k = ({}, {})", k[0], k[1])
            }
            WaveError::SingularPoint => {
                write!(f, "dispersion derivative requested at xi = 0")
            }
            WaveError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            WaveError::NearResonance { label, defect } => {
                write!(f, "near-resonant harmonic {label}: defect {defect:e} below gate")
            }
            WaveError::DepthViolation { margin } => {
                write!(f, "depth guard violated: 1 - eps*|zeta|_inf = {margin}")
            }
            WaveError::HyperbolicityViolation { min_a } => {
                write!(f, "hyperbolicity guard violated: min a = {min_a}")
            }
            WaveError::Incommensurable(msg) => {
                write!(f, "carrier off the micro lattice: {msg}")
            }
            WaveError::NumericalAbort { t } => {
                write!(f, "non-finite value during integration at t = {t}")
            }
            WaveError::MissingInput(msg) => write!(f, "missing input: {msg}"),
        }
    }
}
