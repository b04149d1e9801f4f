//! Generic Fourier-multiplier application `c(k) -> f(k) c(k)` with a parity
//! tag so real fields stay real.

use alloc::boxed::Box;

use num_complex::Complex64;

use crate::error::WaveError;
use crate::field::SpectralField;
use crate::Result;

/// Symmetry class of a symbol, used to decide whether reality survives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `f(-k) = f(k)`, real-valued: preserves real fields.
    RealEven,
    /// `f(-k) = -f(k)`, purely imaginary: preserves real fields; the
    /// unpaired Nyquist mode is zeroed (its sign is ambiguous).
    ImagOdd,
    /// No symmetry assumed; output loses the reality flag.
    General,
}

/// A scalar Fourier multiplier: a symbol over wavenumber plus its parity.
pub struct Multiplier {
    parity: Parity,
    symbol: Box<dyn Fn([f64; 2]) -> Complex64 + Send + Sync>,
}

impl Multiplier {
    pub fn new(
        parity: Parity,
        symbol: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Multiplier {
        Multiplier { parity, symbol: Box::new(symbol) }
    }

    /// Convenience constructor for real-even symbols given as real functions.
    pub fn real_even(symbol: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Multiplier {
        Multiplier::new(Parity::RealEven, move |k| Complex64::new(symbol(k), 0.0))
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Evaluate the symbol at a wavenumber.
    pub fn eval(&self, k: [f64; 2]) -> Complex64 {
        (self.symbol)(k)
    }
}

/// Apply a multiplier to a field, mode by mode.
pub fn apply_multiplier(f: &Multiplier, u: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid().clone();
    let mut out = u.clone();
    for m in grid.modes() {
        if f.parity == Parity::ImagOdd && grid.is_nyquist(m.kappa) {
            out.coeffs_mut()[m.idx] = Complex64::default();
            continue;
        }
        let s = f.eval(m.k);
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(WaveError::SingularSymbol { k: m.k });
        }
        out.coeffs_mut()[m.idx] = s * u.coeffs()[m.idx];
    }
    out.set_real_flag(u.is_real() && f.parity != Parity::General);
    Ok(out)
}
