//! Envelope integrator substeps, conservation, order, and reconstruction.

mod common;

use num_complex::Complex64;
use wavecore::coeffs::CoefficientSet;
use wavecore::dispersion::PhysicalParams;
use wavecore::fit::fit_loglog;
use wavecore::macrosolver::{
    band_limit, mean_source, reconstruct, step_transport_exact, step_transport_forced,
    step_wave, wave_energy, MacroConfig, MacroSolver, MacroState, ReconstructionOrder,
};
use wavecore::resonance::WaveTriple;
use wavecore::{Grid, SpectralField, WaveError};

use common::{field_rel_err, random_field, rng};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn grid_1d(n: usize) -> Grid {
    Grid::new(1, n, 2.0 * std::f64::consts::PI).unwrap()
}

fn gravity_solver(dt: f64) -> MacroSolver {
    let p = PhysicalParams::new(1.0, 0.0, 0.1, 1).unwrap();
    let waves =
        WaveTriple::from_wavevectors([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]], p).unwrap();
    MacroSolver::new(waves, MacroConfig { dt, gate_tol: 1e-3 })
}

#[test]
fn exact_transport_is_unitary_over_many_steps() {
    let grid = grid_1d(64);
    let mut r = rng(50);
    let f0 = random_field(&grid, 10, false, &mut r);
    let norm0 = f0.l2_norm();
    let mut f = f0.clone();
    for _ in 0..1000 {
        f = step_transport_exact(&f, [0.7318, 0.0], 0.01);
    }
    assert!((f.l2_norm() - norm0).abs() <= 1e-13 * norm0);
    // shifting forward and back restores the field exactly
    let back = step_transport_exact(&f, [0.7318, 0.0], -10.0);
    assert!(field_rel_err(&back, &f0) < 1e-12);
}

#[test]
fn exact_transport_matches_the_translated_profile() {
    let grid = grid_1d(64);
    let mut f = SpectralField::zeros(&grid, false);
    f.set_coeff([3, 0], re(1.0));
    let v = 0.4217;
    let t = 1.73;
    let moved = step_transport_exact(&f, [v, 0.0], t);
    // e^{i 3 x} -> e^{i 3 (x - v t)}
    let expect = Complex64::from_polar(1.0, -3.0 * v * t);
    assert!((moved.coeff([3, 0]) - expect).norm() < 1e-14);
}

#[test]
fn homogeneous_wave_step_conserves_energy_over_long_times() {
    let grid = grid_1d(64);
    let mut r = rng(51);
    let mut p = random_field(&grid, 10, true, &mut r);
    let mut dp = random_field(&grid, 10, true, &mut r);
    let zero = SpectralField::zeros(&grid, false);
    let mu = 2.0;
    let e0 = wave_energy(&p, &dp, mu);
    let dt = 0.01;
    for _ in 0..1000 {
        let (pn, dn) = step_wave(&p, &dp, [&zero, &zero, &zero], mu, dt);
        p = pn;
        dp = dn;
    }
    let drift = (wave_energy(&p, &dp, mu) - e0).abs() / e0;
    assert!(drift <= 1e-10, "energy drift {drift:.3e} over t = 10");
}

#[test]
fn homogeneous_wave_step_reproduces_the_mode_rotation() {
    let grid = grid_1d(64);
    let mut p = SpectralField::zeros(&grid, false);
    p.set_coeff([2, 0], re(1.0));
    let dp = SpectralField::zeros(&grid, false);
    let zero = SpectralField::zeros(&grid, false);
    let mu: f64 = 3.0;
    let om = mu.powf(0.25) * 2.0;
    let dt = 0.37;
    let (pn, dn) = step_wave(&p, &dp, [&zero, &zero, &zero], mu, dt);
    assert!((pn.coeff([2, 0]) - re((om * dt).cos())).norm() < 1e-14);
    assert!((dn.coeff([2, 0]) - re(-om * (om * dt).sin())).norm() < 1e-14);
}

#[test]
fn forced_wave_step_is_fourth_order() {
    let grid = grid_1d(16);
    let mu: f64 = 1.0;
    let kk = 2.0;
    let om = mu.powf(0.25) * kk;
    let a = 1.3;
    // psi'' = -om^2 psi + cos(a t) on the mode, started on the particular
    // solution cos(a t) / (om^2 - a^2)
    let amp = 1.0 / (om * om - a * a);
    let exact = |t: f64| re(amp * (a * t).cos());
    let t_end: f64 = 1.0;
    let mut errs = Vec::new();
    let dts = [0.1, 0.05, 0.025, 0.0125];
    for &dt in &dts {
        let mut p = SpectralField::zeros(&grid, false);
        p.set_coeff([kk as i64, 0], exact(0.0));
        let mut dp = SpectralField::zeros(&grid, false);
        let steps = (t_end / dt).round() as usize;
        let mut t = 0.0;
        for _ in 0..steps {
            let src = |tau: f64| {
                let mut s = SpectralField::zeros(&grid, false);
                s.set_coeff([kk as i64, 0], re((a * tau).cos()));
                s
            };
            let (s0, sh, sf) = (src(t), src(t + 0.5 * dt), src(t + dt));
            let (pn, dn) = step_wave(&p, &dp, [&s0, &sh, &sf], mu, dt);
            p = pn;
            dp = dn;
            t += dt;
        }
        errs.push((p.coeff([kk as i64, 0]) - exact(t_end)).norm());
    }
    let fit = fit_loglog(&dts, &errs);
    assert!((fit.slope - 4.0).abs() < 0.2, "wave-step order {:.3}", fit.slope);
}

#[test]
fn forced_transport_step_is_fourth_order() {
    let grid = grid_1d(16);
    let kk = 3.0;
    let v = 0.83;
    let theta = v * kk;
    let a = 0.9;
    // psi' = -i theta psi + e^{i a t} c on the mode, from psi(0) = 0
    let c = Complex64::new(0.4, -0.7);
    let exact = |t: f64| {
        let w = Complex64::new(0.0, theta + a);
        c * ((w * t).exp() - ONE) / w * Complex64::from_polar(1.0, -theta * t)
    };
    let t_end: f64 = 2.0;
    let mut errs = Vec::new();
    let dts = [0.2, 0.1, 0.05, 0.025];
    for &dt in &dts {
        let mut f = SpectralField::zeros(&grid, false);
        let steps = (t_end / dt).round() as usize;
        let mut t = 0.0;
        for _ in 0..steps {
            let force = |tau: f64| {
                let mut e = SpectralField::zeros(&grid, false);
                e.set_coeff([kk as i64, 0], c * Complex64::from_polar(1.0, a * tau));
                e
            };
            let (e0, eh, ef) = (force(t), force(t + 0.5 * dt), force(t + dt));
            f = step_transport_forced(&f, [v, 0.0], [&e0, &eh, &ef], dt);
            t += dt;
        }
        errs.push((f.coeff([kk as i64, 0]) - exact(t_end)).norm());
    }
    let fit = fit_loglog(&dts, &errs);
    assert!(
        (fit.slope - 4.0).abs() < 0.2,
        "forced-transport order {:.3}",
        fit.slope
    );
}

#[test]
fn mean_source_matches_the_coefficient_hierarchy() {
    let solver = gravity_solver(0.01);
    let grid = grid_1d(64);
    let mut r = rng(52);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&grid, 5, false, &mut r).scale(re(0.3)));
    let zeros: [SpectralField; 3] =
        core::array::from_fn(|_| SpectralField::zeros(&grid, false));
    let zero = SpectralField::zeros(&grid, false);
    let cs = CoefficientSet::compute(&solver.waves, &psi0, &zeros, &zero, &zero, 1e-3)
        .unwrap();
    let s = mean_source(&solver.waves, &psi0);
    assert!(field_rel_err(&s, &cs.wave_source) < 1e-13);
}

#[test]
fn integrator_preserves_leading_norms_and_reality() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(32);
    let mut r = rng(53);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&grid, 4, false, &mut r).scale(re(0.2)));
    let norms: Vec<f64> = psi0.iter().map(|f| f.l2_norm()).collect();
    let state = MacroState::from_leading(psi0);
    let out = solver.integrate(&state, 1.0).unwrap();
    assert!((out.t - 1.0).abs() < 1e-12);
    for j in 0..3 {
        assert!((out.psi0[j].l2_norm() - norms[j]).abs() <= 1e-12 * norms[j]);
    }
    for f in [&out.psi00, &out.dt_psi00] {
        let vals = f.to_values();
        let max_im = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        let max_abs = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_im <= 1e-11 * max_abs.max(1.0));
    }
    assert!(out.psi1.iter().all(|f| f.is_finite()));
    assert!(out.psi1.iter().any(|f| f.l2_norm() > 0.0));
}

#[test]
fn integrator_step_subdivision_is_consistent() {
    let solver = gravity_solver(0.025);
    let coarse = gravity_solver(0.05);
    let grid = grid_1d(32);
    let mut r = rng(54);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&grid, 4, false, &mut r).scale(re(0.2)));
    let state = MacroState::from_leading(psi0);
    let fine = solver.integrate(&state, 0.4).unwrap();
    let rough = coarse.integrate(&state, 0.4).unwrap();
    for j in 0..3 {
        assert!(field_rel_err(&rough.psi1[j], &fine.psi1[j]) < 1e-4);
    }
}

#[test]
fn non_finite_states_abort() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(32);
    let mut r = rng(55);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&grid, 4, false, &mut r).scale(re(0.2)));
    let mut state = MacroState::from_leading(psi0);
    state.psi1[0].set_coeff([1, 0], Complex64::new(f64::NAN, 0.0));
    let err = solver.integrate(&state, 0.2).unwrap_err();
    assert!(matches!(err, WaveError::NumericalAbort { .. }), "{err:?}");
}

#[test]
fn reconstruction_of_a_constant_envelope_is_a_plane_wave() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(16);
    let amp = Complex64::new(0.21, -0.13);
    let mut psi0: [SpectralField; 3] =
        core::array::from_fn(|_| SpectralField::zeros(&grid, false));
    psi0[0].set_coeff([0, 0], amp);
    let state = MacroState::from_leading(psi0);
    let cs = solver.coefficient_set(&state).unwrap();
    let eps = 0.125;
    let t = 0.6;
    let (zeta, psi) =
        reconstruct(&cs, ReconstructionOrder::Leading, eps, 256, t).unwrap();
    let w = &solver.waves.waves[0];
    let fine = zeta.grid().clone();
    let zv = zeta.to_values();
    let pv = psi.to_values();
    for idx in (0..fine.total()).step_by(17) {
        let x = fine.point(idx)[0];
        let carrier = Complex64::from_polar(1.0, w.xi[0] * x - w.omega * t);
        let ez = 2.0 * (Complex64::new(0.0, w.omega / w.b) * amp * carrier).re;
        let ep = 2.0 * (amp * carrier).re;
        assert!((zv[idx].re - ez).abs() < 1e-12 && zv[idx].im.abs() < 1e-14);
        assert!((pv[idx].re - ep).abs() < 1e-12 && pv[idx].im.abs() < 1e-14);
    }
}

#[test]
fn reconstruction_is_real_valued_at_every_order() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(32);
    let mut r = rng(56);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&grid, 4, false, &mut r).scale(re(0.2)));
    let state = MacroState::from_leading(psi0);
    let state = solver.integrate(&state, 0.3).unwrap();
    let cs = solver.coefficient_set(&state).unwrap();
    for order in [
        ReconstructionOrder::Leading,
        ReconstructionOrder::First,
        ReconstructionOrder::Full,
    ] {
        let (zeta, psi) = reconstruct(&cs, order, 0.1, 1024, 3.0).unwrap();
        for f in [&zeta, &psi] {
            let vals = f.to_values();
            let max_im = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
            let max_abs = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max_im <= 1e-12 * max_abs.max(1.0), "{order:?}");
        }
    }
}

#[test]
fn reconstruction_orders_are_nested_corrections() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(32);
    let mut r = rng(57);
    let psi0: [SpectralField; 3] =
        core::array::from_fn(|_| random_field(&grid, 4, false, &mut r).scale(re(0.2)));
    let state = MacroState::from_leading(psi0);
    let cs = solver.coefficient_set(&state).unwrap();
    let corrections = |eps: f64, fine_n: usize| {
        let (z0, _) = reconstruct(&cs, ReconstructionOrder::Leading, eps, fine_n, 0.0).unwrap();
        let (z1, _) = reconstruct(&cs, ReconstructionOrder::First, eps, fine_n, 0.0).unwrap();
        let (z2, _) = reconstruct(&cs, ReconstructionOrder::Full, eps, fine_n, 0.0).unwrap();
        let base = z0.l2_norm();
        let d01 = z1.sub(&z0).unwrap().l2_norm() / base;
        let d12 = z2.sub(&z1).unwrap().l2_norm() / base;
        assert!(d01 > 0.0 && d12 > 0.0);
        (d01, d12)
    };
    let (c1, s1) = corrections(0.0625, 512);
    let (c2, s2) = corrections(0.03125, 1024);
    assert!((c1 / c2 - 2.0).abs() < 0.05, "first correction ratio {:.3e}", c1 / c2);
    assert!((s1 / s2 - 4.0).abs() < 0.1, "second correction ratio {:.3e}", s1 / s2);
}

#[test]
fn incommensurable_scale_ratio_is_rejected() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(16);
    let mut psi0: [SpectralField; 3] =
        core::array::from_fn(|_| SpectralField::zeros(&grid, false));
    psi0[0].set_coeff([0, 0], re(0.1));
    let state = MacroState::from_leading(psi0);
    let cs = solver.coefficient_set(&state).unwrap();
    let err = reconstruct(&cs, ReconstructionOrder::Leading, 0.3, 256, 0.0).unwrap_err();
    assert!(matches!(err, WaveError::Incommensurable(_)), "{err:?}");
    let err = reconstruct(&cs, ReconstructionOrder::Full, 0.125, 8, 0.0).unwrap_err();
    assert!(matches!(err, WaveError::InvalidArgument(_)), "{err:?}");
}

#[test]
fn band_limit_cuts_high_modes_only() {
    let grid = grid_1d(32);
    let mut r = rng(58);
    let f = random_field(&grid, 15, false, &mut r);
    let g = band_limit(&f, 1.0 / 3.0);
    for mode in grid.modes() {
        if mode.kappa[0].abs() <= 5 {
            assert_eq!(g.coeffs()[mode.idx], f.coeffs()[mode.idx]);
        } else {
            assert_eq!(g.coeffs()[mode.idx], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn sampling_returns_reconstructions_at_requested_times() {
    let solver = gravity_solver(0.05);
    let grid = grid_1d(32);
    let mut r = rng(59);
    let psi0: [SpectralField; 3] = core::array::from_fn(|_| {
        band_limit(&random_field(&grid, 4, false, &mut r).scale(re(0.2)), 1.0 / 3.0)
    });
    let state = MacroState::from_leading(psi0);
    let snaps = solver
        .sample(&state, &[0.0, 0.1, 0.2], ReconstructionOrder::First, 0.1, 1024)
        .unwrap();
    assert_eq!(snaps.len(), 3);
    assert!((snaps[1].t - 0.1).abs() < 1e-12);
    assert!(snaps.iter().all(|s| s.zeta.is_finite() && s.psi.is_finite()));
}
