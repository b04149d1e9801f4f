//! Spectral toolbox for three weakly modulated gravity/capillary-gravity
//! water waves over finite depth.
//!
//! The crate is built around periodic Fourier-coefficient fields
//! ([`field::SpectralField`]) and provides, on top of them:
//!
//! - the finite-depth dispersion function, its derivatives and the identities
//!   relating them ([`dispersion`]);
//! - quadratic/cubic non-resonance verification for a triple of carriers and
//!   the gravity-wave resonance function ([`resonance`]);
//! - the shape-Taylor expansion of the Dirichlet-Neumann operator ([`dno`]);
//! - the full algebra of envelope coupling coefficients ([`coeffs`]);
//! - time integration of the macroscopic envelope system and two-scale
//!   reconstruction of the approximate surface ([`macrosolver`]);
//! - the reference pseudospectral water-wave evolution with its diagnostics
//!   ([`waterwaves`]).
//!
//! The crate is `no_std` (with `alloc`) so the numerical core can be reused
//! from constrained targets; all IO lives in the companion `wavelab` crate.

#![no_std]

extern crate alloc;

pub mod coeffs;
pub mod dispersion;
pub mod dno;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod macrosolver;
pub mod multiplier;
pub mod resonance;
pub mod waterwaves;

pub(crate) mod real;

pub use error::WaveError;
pub use field::SpectralField;
pub use grid::Grid;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, WaveError>;
