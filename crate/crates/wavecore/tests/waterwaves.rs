//! Full-system checks against closed-form linear-theory oracles.
//!
//! The oracle used throughout is the exact plane-wave family of the
//! linearized flat-surface problem: for a lattice mode `k` with `b(k) =
//! 1 + |k|^2/Bo`, `omega = sqrt(b g0)`, the pair `zeta = a cos(kx - omega t)`,
//! `psi = (a b/omega) sin(kx - omega t)` solves the linearization exactly, so
//! time-periodicity, step-size order, and residual floors can all be measured
//! against closed forms rather than against the solver itself.  Norm weights
//! are hand-computed from the two Fourier coefficients of a single cosine.

mod common;

use core::f64::consts::PI;

use num_complex::Complex64;
use wavecore::dispersion::PhysicalParams;
use wavecore::dno::DnoConfig;
use wavecore::fit::fit_loglog;
use wavecore::macrosolver::{MacroConfig, MacroSolver, MacroState, ReconstructionOrder};
use wavecore::resonance::WaveTriple;
use wavecore::waterwaves::{
    energy_norm, error_norm, hamiltonian, hyperbolicity, integrate_ww, mode_frequency,
    residual_evaluator, rhs, trajectory, SurfaceState,
};
use wavecore::{Grid, SpectralField, WaveError};

use common::{field_rel_err, random_field, rng};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn params(eps: f64) -> PhysicalParams {
    PhysicalParams::new(1.0, 0.0, eps, 1).unwrap()
}

/// Exact solution of the linearized flat-surface system at one mode.
fn linear_wave(grid: &Grid, kappa: i64, amp: f64, t: f64, p: &PhysicalParams) -> SurfaceState {
    let omega = mode_frequency([kappa, 0], grid, p);
    let k = kappa as f64 * grid.dk();
    let b = 1.0 + p.inv_bond * k * k;
    let n = grid.total();
    let mut zv = vec![Complex64::default(); n];
    let mut pv = vec![Complex64::default(); n];
    for i in 0..n {
        let x = grid.len() * i as f64 / n as f64;
        let phase = k * x - omega * t;
        zv[i] = re(amp * phase.cos());
        pv[i] = re(amp * b / omega * phase.sin());
    }
    SurfaceState::new(
        t,
        SpectralField::from_values(grid, &zv, true).unwrap(),
        SpectralField::from_values(grid, &pv, true).unwrap(),
    )
    .unwrap()
}

fn random_state(grid: &Grid, band: i64, amp: f64, seed: u64) -> SurfaceState {
    let mut r = rng(seed);
    let zeta = random_field(grid, band, true, &mut r).scale(re(amp));
    let psi = random_field(grid, band, true, &mut r).scale(re(amp));
    SurfaceState::new(0.0, zeta, psi).unwrap()
}

#[test]
fn rest_state_has_zero_time_derivative() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let u = SurfaceState::new(
        0.0,
        SpectralField::zeros(&grid, true),
        SpectralField::zeros(&grid, true),
    )
    .unwrap();
    let (dz, dp) = rhs(&u, &DnoConfig::default(), &params(0.1)).unwrap();
    assert_eq!(dz.l2_norm(), 0.0);
    assert_eq!(dp.l2_norm(), 0.0);
}

#[test]
fn potential_gauge_shift_leaves_the_flow_unchanged() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let u = random_state(&grid, 3, 0.2, 11);
    let cfg = DnoConfig::default();
    let p = params(0.3);
    let (dz, dp) = rhs(&u, &cfg, &p).unwrap();
    let mut shifted = u.clone();
    shifted.psi.set_coeff([0, 0], shifted.psi.coeff([0, 0]) + re(5.0));
    let (dz2, dp2) = rhs(&shifted, &cfg, &p).unwrap();
    assert!(dz.sub(&dz2).unwrap().l2_norm() < 1e-13);
    assert!(dp.sub(&dp2).unwrap().l2_norm() < 1e-13);
    // the kinematic component never moves the spatial mean
    assert!(dz.coeff([0, 0]).norm() < 1e-15);
}

#[test]
fn linear_plane_wave_returns_after_one_period() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let p = params(1.0);
    let u0 = linear_wave(&grid, 2, 1e-6, 0.0, &p);
    let period = 2.0 * PI / mode_frequency([2, 0], &grid, &p);
    let end = integrate_ww(&u0, period, period / 64.0, &DnoConfig::default(), &p).unwrap();
    assert!(field_rel_err(&end.zeta, &u0.zeta) < 1e-5);
    assert!(field_rel_err(&end.psi, &u0.psi) < 1e-5);
}

#[test]
fn capillary_plane_wave_returns_after_one_period() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let p = PhysicalParams::new(4.0, 0.5, 1.0, 1).unwrap();
    let u0 = linear_wave(&grid, 2, 1e-6, 0.0, &p);
    let period = 2.0 * PI / mode_frequency([2, 0], &grid, &p);
    let end = integrate_ww(&u0, period, period / 512.0, &DnoConfig::default(), &p).unwrap();
    assert!(field_rel_err(&end.zeta, &u0.zeta) < 1e-5);
    assert!(field_rel_err(&end.psi, &u0.psi) < 1e-5);
}

#[test]
fn integrator_is_fourth_order_in_the_step_size() {
    let grid = Grid::new(1, 8, 2.0 * PI).unwrap();
    let p = params(1.0);
    let amp = 1e-9;
    let u0 = linear_wave(&grid, 2, amp, 0.0, &p);
    let period = 2.0 * PI / mode_frequency([2, 0], &grid, &p);
    let exact = linear_wave(&grid, 2, amp, period / 2.0, &p);
    let cfg = DnoConfig::default();
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for m in [32.0, 64.0, 128.0, 256.0] {
        let dt = period / m;
        let end = integrate_ww(&u0, period / 2.0, dt, &cfg, &p).unwrap();
        let err = end.zeta.sub(&exact.zeta).unwrap().l2_norm()
            + end.psi.sub(&exact.psi).unwrap().l2_norm();
        dts.push(dt);
        errs.push(err);
    }
    let fit = fit_loglog(&dts, &errs);
    assert!((fit.slope - 4.0).abs() < 0.2, "step-size order {:.3}", fit.slope);
}

#[test]
fn surface_mean_is_conserved() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let p = params(0.2);
    let mut u = random_state(&grid, 3, 0.1, 21);
    u.zeta.set_coeff([0, 0], re(0.3));
    let end = integrate_ww(&u, 1.0, 0.02, &DnoConfig::default(), &p).unwrap();
    let drift = (end.zeta.coeff([0, 0]) - re(0.3)).norm();
    assert!(drift < 1e-12, "mean drift {drift:.3e}");
}

#[test]
fn hamiltonian_drift_stays_small_over_a_macroscopic_unit() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let p = params(0.125);
    let cfg = DnoConfig::default();
    let u0 = random_state(&grid, 3, 0.05, 31);
    let h0 = hamiltonian(&u0, &cfg, &p).unwrap();
    let end = integrate_ww(&u0, 8.0, 0.02, &cfg, &p).unwrap();
    let h1 = hamiltonian(&end, &cfg, &p).unwrap();
    assert!(((h1 - h0) / h0).abs() < 1e-6, "relative drift {:.3e}", (h1 - h0) / h0);
}

#[test]
fn time_step_must_resolve_the_fastest_grid_mode() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let p = params(0.1);
    let u = random_state(&grid, 2, 0.01, 41);
    let err = integrate_ww(&u, 1.0, 0.5, &DnoConfig::default(), &p).unwrap_err();
    assert!(matches!(err, WaveError::InvalidArgument(_)), "{err:?}");
}

#[test]
fn non_finite_states_abort_with_a_time_stamp() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let mut u = random_state(&grid, 2, 0.01, 42);
    u.psi.set_coeff([1, 0], Complex64::new(f64::NAN, 0.0));
    u.psi.set_coeff([-1, 0], Complex64::new(f64::NAN, 0.0));
    let err = integrate_ww(&u, 1.0, 0.05, &DnoConfig::default(), &params(0.1)).unwrap_err();
    assert!(matches!(err, WaveError::NumericalAbort { .. }), "{err:?}");
}

#[test]
fn deep_surfaces_violate_the_depth_gate() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let mut u = random_state(&grid, 1, 0.0, 43);
    u.zeta.set_coeff([0, 0], re(3.0));
    let err = rhs(&u, &DnoConfig::default(), &params(0.5)).unwrap_err();
    assert!(matches!(err, WaveError::DepthViolation { .. }), "{err:?}");
}

#[test]
fn trajectory_returns_the_initial_state_at_its_own_time() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let p = params(0.1);
    let u = random_state(&grid, 2, 0.05, 44);
    let snaps = trajectory(&u, &[0.0, 0.2, 0.4], 0.05, &DnoConfig::default(), &p).unwrap();
    assert_eq!(snaps.len(), 3);
    assert!(snaps[0].zeta.sub(&u.zeta).unwrap().l2_norm() == 0.0);
    assert!((snaps[2].t - 0.4).abs() < 1e-14);
}

#[test]
fn hyperbolicity_of_the_rest_state_is_one() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let u = SurfaceState::new(
        0.0,
        SpectralField::zeros(&grid, true),
        SpectralField::zeros(&grid, true),
    )
    .unwrap();
    let (field, min) = hyperbolicity(&u, &DnoConfig::default(), &params(0.3)).unwrap();
    assert!((min - 1.0).abs() < 1e-14);
    for v in field.to_values() {
        assert!((v.re - 1.0).abs() < 1e-14);
    }
}

#[test]
fn hyperbolicity_deficit_scales_linearly_with_steepness() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let cfg = DnoConfig::default();
    let u = random_state(&grid, 2, 0.2, 51);
    let mut epss = Vec::new();
    let mut defs = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let (_, min) = hyperbolicity(&u, &cfg, &params(eps)).unwrap();
        assert!(min > 0.5, "hyperbolicity lost at eps={eps}: {min}");
        epss.push(eps);
        defs.push(1.0 - min);
    }
    let fit = fit_loglog(&epss, &defs);
    assert!((fit.slope - 1.0).abs() < 0.2, "deficit slope {:.3}", fit.slope);
}

#[test]
fn subprincipal_parity_splits_into_linear_and_quadratic_blocks() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let cfg = DnoConfig::default();
    let p = params(1.0);
    let base = random_state(&grid, 2, 1.0, 52);
    let b1 = |lambda: f64| {
        let s = SurfaceState::new(
            0.0,
            base.zeta.scale(re(lambda)),
            base.psi.scale(re(lambda)),
        )
        .unwrap();
        let (a, _) = hyperbolicity(&s, &cfg, &p).unwrap();
        let mut out = SpectralField::constant(&grid, re(1.0));
        out.add_scaled(re(-1.0), &a).unwrap();
        out
    };
    let split = |lambda: f64| {
        let plus = b1(lambda);
        let minus = b1(-lambda);
        let mut odd = plus.clone();
        odd.add_scaled(re(-1.0), &minus).unwrap();
        let mut even = plus;
        even.add_scaled(re(1.0), &minus).unwrap();
        (odd.scale(re(0.5)), even.scale(re(0.5)))
    };
    let (odd_a, even_a) = split(1e-3);
    let (odd_b, even_b) = split(2e-3);
    // odd block is linear in the state, even block quadratic
    let lin = field_rel_err(&odd_b.scale(re(0.5)), &odd_a);
    let quad = field_rel_err(&even_b.scale(re(0.25)), &even_a);
    assert!(lin < 1e-4, "linear block mismatch {lin:.3e}");
    assert!(quad < 1e-2, "quadratic block mismatch {quad:.3e}");
    assert!(odd_a.l2_norm() > 10.0 * even_a.l2_norm());
}

#[test]
fn error_norm_is_a_gauge_blind_metric() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let a = random_state(&grid, 4, 0.3, 61);
    let b = random_state(&grid, 4, 0.3, 62);
    let c = random_state(&grid, 4, 0.3, 63);
    assert_eq!(error_norm(&a, &a, 3.0).unwrap(), 0.0);
    let ab = error_norm(&a, &b, 3.0).unwrap();
    let ba = error_norm(&b, &a, 3.0).unwrap();
    assert!((ab - ba).abs() < 1e-12 * ab);
    let ac = error_norm(&a, &c, 3.0).unwrap();
    let cb = error_norm(&c, &b, 3.0).unwrap();
    assert!(ab <= ac + cb + 1e-12);
    let mut shifted = b.clone();
    shifted.psi.set_coeff([0, 0], shifted.psi.coeff([0, 0]) + re(7.0));
    assert!((error_norm(&a, &shifted, 3.0).unwrap() - ab).abs() < 1e-12 * ab);
}

#[test]
fn error_norm_matches_the_single_mode_weight() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let zero = SurfaceState::new(
        0.0,
        SpectralField::zeros(&grid, true),
        SpectralField::zeros(&grid, true),
    )
    .unwrap();
    let (a, c, kappa) = (0.3, 0.7, 2.0_f64);
    let mut u = zero.clone();
    u.zeta.set_coeff([2, 0], re(a / 2.0));
    u.zeta.set_coeff([-2, 0], re(a / 2.0));
    u.psi.set_coeff([2, 0], re(c / 2.0));
    u.psi.set_coeff([-2, 0], re(c / 2.0));
    let n_index = 2.0;
    // two coefficients a/2 at +-kappa: |zeta|_{H^1}^2 = 2 vol (1+kappa^2) a^2/4
    let vol = 2.0 * PI;
    let expect = (2.0 * vol * (1.0 + kappa * kappa) * a * a / 4.0
        + 2.0 * vol * kappa * kappa * c * c / 4.0)
        .sqrt();
    let got = error_norm(&u, &zero, n_index).unwrap();
    assert!((got - expect).abs() < 1e-12 * expect, "got {got}, expected {expect}");
}

#[test]
fn energy_norm_reduces_to_weighted_sobolev_sums_on_a_flat_surface() {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let p = PhysicalParams::new(4.0, 0.0, 0.2, 1).unwrap();
    let cfg = DnoConfig::default();
    let zero = SurfaceState::new(
        0.0,
        SpectralField::zeros(&grid, true),
        SpectralField::zeros(&grid, true),
    )
    .unwrap();
    assert_eq!(energy_norm(&zero, 2, &cfg, &p).unwrap(), 0.0);

    let (a, kappa) = (0.4, 3.0_f64);
    let mut u = zero.clone();
    u.psi.set_coeff([3, 0], re(a / 2.0));
    u.psi.set_coeff([-3, 0], re(a / 2.0));
    let weight = kappa * kappa / (1.0 + p.mu.sqrt() * kappa);
    let vol = 2.0 * PI;
    let mode_sq = 2.0 * vol * a * a / 4.0;
    // |P psi|_{H^3}^2 plus |P d^alpha psi|_2^2 for |alpha| <= 2
    let expect = (mode_sq
        * weight
        * ((1.0 + kappa * kappa).powi(3) + 1.0 + kappa * kappa + kappa * kappa * kappa * kappa))
        .sqrt();
    let got = energy_norm(&u, 2, &cfg, &p).unwrap();
    assert!((got - expect).abs() < 1e-12 * expect, "got {got}, expected {expect}");
}

#[test]
fn residual_of_the_exact_linear_wave_is_at_machine_floor() {
    let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
    let p = params(1.0);
    let cfg = DnoConfig::default();
    let amp = 1e-8;
    let mut provider = |t: f64| Ok(linear_wave(&grid, 2, amp, t, &p));
    let samples = residual_evaluator(&mut provider, &[0.7], 0.01, &cfg, &p).unwrap();
    assert!(samples[0].zeta_l2 < 1e-14, "kinematic floor {:.3e}", samples[0].zeta_l2);
    assert!(samples[0].psi_l2 < 1e-14, "dynamic floor {:.3e}", samples[0].psi_l2);
}

/// Stencil states and frozen coefficient sets along the slow-time axis.
struct AnsatzProvider {
    solver: MacroSolver,
    eps: f64,
    base: MacroState,
    fine_n: usize,
    order: ReconstructionOrder,
}

impl AnsatzProvider {
    fn state(&self, t: f64) -> wavecore::Result<(SpectralField, SpectralField)> {
        let slow = self.eps * t;
        let s = self.solver.integrate(&self.base, slow)?;
        let cs = self.solver.coefficient_set(&s)?;
        wavecore::macrosolver::reconstruct(&cs, self.order, self.eps, self.fine_n, t)
    }
}

#[test]
fn ansatz_residual_scales_cubically_and_its_truncation_quadratically() {
    let p = params(1.0);
    let waves =
        WaveTriple::from_wavevectors([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]], p).unwrap();
    let coarse = Grid::new(1, 64, 2.0 * PI).unwrap();
    let mut r = rng(71);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&coarse, 2, false, &mut r).scale(re(0.1)));
    let base = MacroState::from_leading(psi0);
    let cfg = DnoConfig::default();

    let run = |order: ReconstructionOrder| {
        let mut epss = Vec::new();
        let mut res = Vec::new();
        for m in [5.0_f64, 10.0, 20.0] {
            let eps = 1.0 / m;
            let provider = AnsatzProvider {
                solver: MacroSolver::new(waves.clone(), MacroConfig { dt: 0.02, gate_tol: 1e-3 }),
                eps,
                base: base.clone(),
                fine_n: 1024,
                order,
            };
            let pe = params(eps);
            let mut f = |t: f64| {
                let (zeta, psi) = provider.state(t)?;
                SurfaceState::new(t, zeta, psi)
            };
            let samples = residual_evaluator(&mut f, &[0.5], 0.01, &cfg, &pe).unwrap();
            epss.push(eps);
            res.push(samples[0].combined());
        }
        fit_loglog(&epss, &res).slope
    };

    let full = run(ReconstructionOrder::Full);
    assert!((full - 3.0).abs() < 0.3, "full-ansatz residual slope {full:.3}");
    let first = run(ReconstructionOrder::First);
    assert!((first - 2.0).abs() < 0.3, "truncated-ansatz residual slope {first:.3}");
}
