//! Substrate checks: transforms, multipliers, norms, dealiasing, products.

mod common;

use core::f64::consts::PI;

use num_complex::Complex64;
use wavecore::multiplier::{apply_multiplier, Multiplier, Parity};
use wavecore::{Grid, SpectralField};

use common::{field_rel_err, random_field, rel_err, rng};

const TANH1: f64 = 0.761594155955764888;

fn grid1(n: usize, len: f64) -> Grid {
    Grid::new(1, n, len).unwrap()
}

#[test]
fn round_trip_physical_spectral() {
    let mut r = rng(1);
    for (dim, n) in [(1usize, 64usize), (2, 32)] {
        let grid = Grid::new(dim, n, 2.0 * PI).unwrap();
        for real in [false, true] {
            let f = random_field(&grid, (n / 3) as i64, real, &mut r);
            let back = SpectralField::from_values(&grid, &f.to_values(), real).unwrap();
            assert!(field_rel_err(&back, &f) < 1e-12);
        }
    }
}

#[test]
fn multiplier_identity_is_identity() {
    let grid = grid1(32, 2.0 * PI);
    let mut r = rng(2);
    let u = random_field(&grid, 10, false, &mut r);
    let one = Multiplier::real_even(|_| 1.0);
    let v = apply_multiplier(&one, &u).unwrap();
    assert!(field_rel_err(&v, &u) < 1e-15);
}

#[test]
fn multiplier_dispersion_symbol_on_plane_wave() {
    let grid = grid1(32, 2.0 * PI);
    let mut u = SpectralField::zeros(&grid, false);
    u.set_coeff([1, 0], Complex64::new(1.0, 0.0));
    let mu: f64 = 1.0;
    let f = Multiplier::real_even(move |k| {
        let ka = (k[0] * k[0] + k[1] * k[1]).sqrt();
        ka * (mu.sqrt() * ka).tanh()
    });
    let v = apply_multiplier(&f, &u).unwrap();
    assert!(rel_err(v.coeff([1, 0]).re, TANH1) < 1e-14);
    assert!(v.coeff([1, 0]).im.abs() < 1e-15);
}

#[test]
fn multiplier_derivative_of_sine() {
    let grid = grid1(32, 2.0 * PI);
    let vals: Vec<Complex64> = (0..32)
        .map(|i| Complex64::new((grid.point(i)[0]).sin(), 0.0))
        .collect();
    let u = SpectralField::from_values(&grid, &vals, true).unwrap();
    let d = Multiplier::new(Parity::ImagOdd, |k| Complex64::new(0.0, k[0]));
    let v = apply_multiplier(&d, &u).unwrap();
    let out = v.to_values();
    for i in 0..32 {
        let x = grid.point(i)[0];
        assert!((out[i].re - x.cos()).abs() < 1e-12);
        assert!(out[i].im.abs() < 1e-12);
    }
    assert!(v.is_real());
}

#[test]
fn multiplier_linearity() {
    let grid = grid1(64, 2.0 * PI);
    let mut r = rng(3);
    let u = random_field(&grid, 20, false, &mut r);
    let v = random_field(&grid, 20, false, &mut r);
    let f = Multiplier::real_even(|k| 1.0 + k[0] * k[0]);
    let a = Complex64::new(1.3, -0.4);
    let b = Complex64::new(-0.7, 2.1);
    let lhs = apply_multiplier(&f, &u.scale(a).add(&v.scale(b)).unwrap()).unwrap();
    let rhs = apply_multiplier(&f, &u)
        .unwrap()
        .scale(a)
        .add(&apply_multiplier(&f, &v).unwrap().scale(b))
        .unwrap();
    assert!(field_rel_err(&lhs, &rhs) < 1e-12);
}

#[test]
fn real_even_symbol_preserves_reality() {
    let grid = grid1(64, 2.0 * PI);
    let mut r = rng(4);
    let u = random_field(&grid, 20, true, &mut r);
    let f = Multiplier::real_even(|k| (k[0] * k[0] + 1.0).sqrt());
    let v = apply_multiplier(&f, &u).unwrap();
    assert!(v.is_real());
    let max_imag = v.to_values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!(max_imag < 1e-12 * v.l2_norm().max(1e-13));
}

#[test]
fn singular_symbol_is_reported() {
    let grid = grid1(32, 2.0 * PI);
    let u = SpectralField::constant(&grid, Complex64::new(1.0, 0.0));
    let f = Multiplier::real_even(|k| 1.0 / (k[0] * k[0] + k[1] * k[1]));
    assert!(apply_multiplier(&f, &u).is_err());
}

#[test]
fn sobolev_norm_examples() {
    let grid = grid1(32, 2.0 * PI);
    let zero = SpectralField::zeros(&grid, false);
    assert_eq!(zero.sobolev_norm(2.0), 0.0);

    let mut u = SpectralField::zeros(&grid, false);
    u.set_coeff([1, 0], Complex64::new(1.0, 0.0));
    assert!(rel_err(u.sobolev_norm(0.0), (2.0 * PI).sqrt()) < 1e-14);
    assert!(rel_err(u.sobolev_norm(1.0), 2.0 * PI.sqrt()) < 1e-14);
}

#[test]
fn sobolev_zero_matches_quadrature() {
    let mut r = rng(5);
    for dim in [1usize, 2] {
        let grid = Grid::new(dim, 32, 5.0).unwrap();
        let u = random_field(&grid, 10, false, &mut r);
        let dx = grid.len() / grid.n() as f64;
        let quad: f64 = u
            .to_values()
            .iter()
            .map(|v| v.norm_sqr() * dx.powi(dim as i32))
            .sum::<f64>()
            .sqrt();
        assert!(rel_err(u.sobolev_norm(0.0), quad) < 1e-10);
    }
}

#[test]
fn dealias_rules() {
    let grid = grid1(16, 2.0 * PI);
    let mut r = rng(6);
    let u = random_field(&grid, 8, false, &mut r);
    assert!(field_rel_err(&u.dealias(1.0), &u) < 1e-15);

    let v = u.dealias(2.0 / 3.0);
    for m in grid.modes() {
        if m.kappa[0].abs() >= 6 {
            assert_eq!(v.coeffs()[m.idx], Complex64::default());
        } else {
            assert_eq!(v.coeffs()[m.idx], u.coeffs()[m.idx]);
        }
    }

    let retained: f64 = grid
        .modes()
        .filter(|m| m.kappa[0].abs() <= 5)
        .map(|m| u.coeffs()[m.idx].norm_sqr())
        .sum();
    let direct: f64 = v.coeffs().iter().map(|c| c.norm_sqr()).sum();
    assert!(rel_err(direct, retained) < 1e-13);
}

#[test]
fn exact_product_matches_pointwise_product() {
    let mut r = rng(7);
    for dim in [1usize, 2] {
        let grid = Grid::new(dim, 64, 3.0).unwrap();
        let u = random_field(&grid, 14, true, &mut r);
        let v = random_field(&grid, 14, true, &mut r);
        let w = u.mul_exact(&v).unwrap();
        let direct: Vec<Complex64> = u
            .to_values()
            .iter()
            .zip(v.to_values().iter())
            .map(|(a, b)| a * b)
            .collect();
        let w2 = SpectralField::from_values(&grid, &direct, true).unwrap();
        // band 14 + 14 < Nyquist 32: the same-grid product is alias-free too
        assert!(field_rel_err(&w, &w2) < 1e-12);
        assert!(w.is_real());
    }
}

#[test]
fn conj_field_represents_conjugate_values() {
    let grid = grid1(32, 2.0 * PI);
    let mut r = rng(8);
    let u = random_field(&grid, 10, false, &mut r);
    let c = u.conj_field();
    for (a, b) in u.to_values().iter().zip(c.to_values().iter()) {
        assert!((a.conj() - b).norm() < 1e-12);
    }
}

#[test]
fn derivative_annihilates_nyquist() {
    let grid = grid1(16, 2.0 * PI);
    let mut u = SpectralField::zeros(&grid, true);
    u.set_coeff([8, 0], Complex64::new(1.0, 0.0));
    let d = u.deriv(0);
    assert_eq!(d.l2_norm(), 0.0);
}
