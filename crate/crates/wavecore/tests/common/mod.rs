//! Shared helpers for the integration-test suites.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavecore::{Grid, SpectralField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random smooth field: Gaussian-decaying coefficients up to `band`, optional
/// Hermitian projection for a real-valued field.
pub fn random_field(grid: &Grid, band: i64, real: bool, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut f = SpectralField::zeros(grid, false);
    let modes: Vec<_> = grid.modes().collect();
    for m in modes {
        let ka = m.kappa[0].abs().max(m.kappa[1].abs());
        if ka > band {
            continue;
        }
        let decay = (-(m.kappa[0].pow(2) + m.kappa[1].pow(2)) as f64 / (band * band) as f64).exp();
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        f.set_coeff(m.kappa, Complex64::new(re, im) * decay);
    }
    if real {
        f.hermitize();
    }
    f
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Relative L2 distance between two fields, with an absolute floor for the
/// zero field.
pub fn field_rel_err(a: &SpectralField, b: &SpectralField) -> f64 {
    let d = a.sub(b).unwrap().l2_norm();
    let n = b.l2_norm();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}
