//! Time integration of the slow envelope system and two-scale reconstruction.
//!
//! The envelope hierarchy evolves on the slow scales `(X, T)`:
//!
//! * the leading envelopes `psi_0j` are advected at their group velocities
//!   and advance by an exact spectral shift;
//! * the mean flow `psi_00` obeys a linear wave equation with wave speed
//!   `mu^(1/4)` per mode and a quadratic source, advanced by the exact
//!   per-mode rotation plus a Simpson quadrature of the Duhamel integral;
//! * the corrections `psi_1j` obey forced transport equations, advanced by
//!   an integrating factor plus the same Simpson quadrature.
//!
//! All three substeps are exact on the homogeneous part, so the scheme
//! conserves the transport norms and the wave energy to rounding; the forced
//! quadratures make the full step fourth-order accurate in the step size.
//!
//! [`reconstruct`] assembles the oscillatory surface fields on the fine grid
//! by pure index arithmetic: the envelope coefficient at slow mode `kappa`
//! lands at fine mode `M xi_j + kappa` under the scale ratio `M = 1/eps`,
//! carrying the carrier phase `exp(-i omega_j t)`, plus complex conjugates.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::coeffs::{dir_deriv, CoefficientSet, Envelope};
use crate::error::WaveError;
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::real;
use crate::resonance::WaveTriple;
use crate::Result;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Free data of the envelope hierarchy at one slow time.
#[derive(Debug, Clone)]
pub struct MacroState {
    pub t: f64,
    pub psi0: [SpectralField; 3],
    pub psi1: [SpectralField; 3],
    pub psi00: SpectralField,
    pub dt_psi00: SpectralField,
}

impl MacroState {
    /// A state at `t = 0` with vanishing corrections and mean flow.
    pub fn from_leading(psi0: [SpectralField; 3]) -> MacroState {
        let grid = psi0[0].grid().clone();
        MacroState {
            t: 0.0,
            psi1: core::array::from_fn(|_| SpectralField::zeros(&grid, false)),
            psi00: SpectralField::zeros(&grid, false),
            dt_psi00: SpectralField::zeros(&grid, false),
            psi0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.psi0[0].grid()
    }

    pub fn is_finite(&self) -> bool {
        self.psi0.iter().all(|f| f.is_finite())
            && self.psi1.iter().all(|f| f.is_finite())
            && self.psi00.is_finite()
            && self.dt_psi00.is_finite()
    }
}

/// Exact advection: multiply mode `k` by `exp(-i (velocity . k) dt)`.
pub fn step_transport_exact(f: &SpectralField, velocity: [f64; 2], dt: f64) -> SpectralField {
    let mut out = f.clone();
    for mode in f.grid().modes() {
        let phase = -(mode.k[0] * velocity[0] + mode.k[1] * velocity[1]) * dt;
        out.coeffs_mut()[mode.idx] =
            f.coeffs()[mode.idx] * Complex64::new(real::cos(phase), real::sin(phase));
    }
    out.set_real_flag(f.is_real());
    out
}

/// Source of the mean-flow wave equation,
/// `sum_j ((g_j^2 - |xi_j|^2) d/dT + 2 (omega_j/b_j) xi_j . grad) |psi_0j|^2`.
pub fn mean_source(waves: &WaveTriple, psi0: &[SpectralField; 3]) -> SpectralField {
    let grid = psi0[0].grid().clone();
    let mut out = SpectralField::zeros(&grid, false);
    for j in 0..3 {
        let w = &waves.waves[j];
        let env = Envelope::transported(psi0[j].clone(), w.group_velocity);
        let amp2 = env.mul(&env.conj());
        out.add_scaled(re(w.g * w.g - w.xi_sq()), &amp2.dt).unwrap();
        out.add_scaled(re(2.0 * w.omega / w.b), &dir_deriv(&amp2.value, w.xi))
            .unwrap();
    }
    out
}

/// Advance the mean-flow wave equation by `dt` given the source at the step
/// start, midpoint, and end: exact rotation plus Simpson-Duhamel.
pub fn step_wave(
    psi: &SpectralField,
    dpsi: &SpectralField,
    sources: [&SpectralField; 3],
    mu: f64,
    dt: f64,
) -> (SpectralField, SpectralField) {
    let grid = psi.grid().clone();
    let mut pnew = psi.clone();
    let mut dnew = dpsi.clone();
    let speed = real::powf(mu, 0.25);
    for mode in grid.modes() {
        let om = speed * mode.k_abs();
        let p = psi.coeffs()[mode.idx];
        let dp = dpsi.coeffs()[mode.idx];
        let s0 = sources[0].coeffs()[mode.idx];
        let sh = sources[1].coeffs()[mode.idx];
        let sf = sources[2].coeffs()[mode.idx];
        let (p1, d1) = if om * dt > 1e-12 {
            let (c, s) = (real::cos(om * dt), real::sin(om * dt));
            let (ch, sh_) = (real::cos(om * dt / 2.0), real::sin(om * dt / 2.0));
            // Duhamel kernels sin(om (dt - s))/om and cos(om (dt - s))
            let i1 = (s0 * (s / om) + sh * (4.0 * sh_ / om)) * (dt / 6.0);
            let i2 = (s0 * c + sh * (4.0 * ch) + sf) * (dt / 6.0);
            (c * p + (s / om) * dp + i1, -om * s * p + c * dp + i2)
        } else {
            // degenerate mode: double integral of the source
            let i1 = (s0 * dt + sh * (2.0 * dt)) * (dt / 6.0);
            let i2 = (s0 + sh * 4.0 + sf) * (dt / 6.0);
            (p + dt * dp + i1, dp + i2)
        };
        pnew.coeffs_mut()[mode.idx] = p1;
        dnew.coeffs_mut()[mode.idx] = d1;
    }
    let realness = psi.is_real() && dpsi.is_real() && sources.iter().all(|s| s.is_real());
    pnew.set_real_flag(realness);
    dnew.set_real_flag(realness);
    (pnew, dnew)
}

/// Quadratic energy of the mean-flow wave equation,
/// `sum_k |dpsi_k|^2 + sqrt(mu) |k|^2 |psi_k|^2`.
pub fn wave_energy(psi: &SpectralField, dpsi: &SpectralField, mu: f64) -> f64 {
    let mut e = 0.0;
    for mode in psi.grid().modes() {
        let p = psi.coeffs()[mode.idx].norm_sqr();
        let d = dpsi.coeffs()[mode.idx].norm_sqr();
        e += d + real::sqrt(mu) * mode.k_sq() * p;
    }
    e
}

/// Advance a forced transport equation by `dt` given the forcing at the step
/// start, midpoint, and end: integrating factor plus Simpson quadrature.
pub fn step_transport_forced(
    f: &SpectralField,
    velocity: [f64; 2],
    forcings: [&SpectralField; 3],
    dt: f64,
) -> SpectralField {
    let mut out = f.clone();
    for mode in f.grid().modes() {
        let theta = mode.k[0] * velocity[0] + mode.k[1] * velocity[1];
        let rot = |s: f64| Complex64::new(real::cos(theta * s), real::sin(theta * s));
        let g0 = forcings[0].coeffs()[mode.idx];
        let gh = forcings[1].coeffs()[mode.idx] * rot(dt / 2.0);
        let gf = forcings[2].coeffs()[mode.idx] * rot(dt);
        let integral = (g0 + gh * 4.0 + gf) * (dt / 6.0);
        out.coeffs_mut()[mode.idx] = (f.coeffs()[mode.idx] + integral) * rot(-dt);
    }
    out.set_real_flag(false);
    out
}

/// Step size and gating for the envelope integrator.
#[derive(Debug, Clone, Copy)]
pub struct MacroConfig {
    pub dt: f64,
    pub gate_tol: f64,
}

impl Default for MacroConfig {
    fn default() -> MacroConfig {
        MacroConfig { dt: 0.01, gate_tol: 1e-3 }
    }
}

/// Integrator of the coupled envelope hierarchy.
#[derive(Debug, Clone)]
pub struct MacroSolver {
    pub waves: WaveTriple,
    pub cfg: MacroConfig,
}

impl MacroSolver {
    pub fn new(waves: WaveTriple, cfg: MacroConfig) -> MacroSolver {
        MacroSolver { waves, cfg }
    }

    /// The full derived-coefficient hierarchy at the state's time.
    pub fn coefficient_set(&self, s: &MacroState) -> Result<CoefficientSet> {
        CoefficientSet::compute(
            &self.waves,
            &s.psi0,
            &s.psi1,
            &s.psi00,
            &s.dt_psi00,
            self.cfg.gate_tol,
        )
    }

    /// Transport forcing of the corrections, given leading data only.
    fn forcing(
        &self,
        psi0: &[SpectralField; 3],
        psi00: &SpectralField,
        dt_psi00: &SpectralField,
    ) -> Result<[SpectralField; 3]> {
        let grid = psi0[0].grid().clone();
        let zeros: [SpectralField; 3] =
            core::array::from_fn(|_| SpectralField::zeros(&grid, false));
        let cs = CoefficientSet::compute(
            &self.waves,
            psi0,
            &zeros,
            psi00,
            dt_psi00,
            self.cfg.gate_tol,
        )?;
        Ok(cs.e_forcing)
    }

    /// One step of size `dt`, reusing `forcing_start` when the caller already
    /// evaluated the forcing at the state's time.
    pub fn step_with(
        &self,
        s: &MacroState,
        dt: f64,
        forcing_start: Option<&[SpectralField; 3]>,
    ) -> Result<(MacroState, [SpectralField; 3])> {
        let mu = self.waves.params.mu;
        let advect = |tau: f64| -> [SpectralField; 3] {
            core::array::from_fn(|j| {
                step_transport_exact(&s.psi0[j], self.waves.waves[j].group_velocity, tau)
            })
        };
        let psi0_q = advect(0.25 * dt);
        let psi0_h = advect(0.5 * dt);
        let psi0_3q = advect(0.75 * dt);
        let psi0_f = advect(dt);

        let src0 = mean_source(&self.waves, &s.psi0);
        let srcq = mean_source(&self.waves, &psi0_q);
        let srch = mean_source(&self.waves, &psi0_h);
        let src3q = mean_source(&self.waves, &psi0_3q);
        let srcf = mean_source(&self.waves, &psi0_f);

        // mean flow to the midpoint (for the midpoint forcing) and the end
        let (p00_h, dp00_h) =
            step_wave(&s.psi00, &s.dt_psi00, [&src0, &srcq, &srch], mu, 0.5 * dt);
        let (p00_f, dp00_f) =
            step_wave(&p00_h, &dp00_h, [&srch, &src3q, &srcf], mu, 0.5 * dt);

        let e0 = match forcing_start {
            Some(e) => e.clone(),
            None => self.forcing(&s.psi0, &s.psi00, &s.dt_psi00)?,
        };
        let eh = self.forcing(&psi0_h, &p00_h, &dp00_h)?;
        let ef = self.forcing(&psi0_f, &p00_f, &dp00_f)?;

        let psi1: [SpectralField; 3] = core::array::from_fn(|j| {
            step_transport_forced(
                &s.psi1[j],
                self.waves.waves[j].group_velocity,
                [&e0[j], &eh[j], &ef[j]],
                dt,
            )
        });
        let next = MacroState {
            t: s.t + dt,
            psi0: psi0_f,
            psi1,
            psi00: p00_f,
            dt_psi00: dp00_f,
        };
        if !next.is_finite() {
            return Err(WaveError::NumericalAbort { t: next.t });
        }
        Ok((next, ef))
    }

    pub fn step(&self, s: &MacroState, dt: f64) -> Result<MacroState> {
        Ok(self.step_with(s, dt, None)?.0)
    }

    /// Advance to `t_end` in uniform steps of at most the configured size.
    pub fn integrate(&self, s: &MacroState, t_end: f64) -> Result<MacroState> {
        if t_end < s.t {
            return Err(WaveError::InvalidArgument(format!(
                "target time {t_end} precedes state time {}",
                s.t
            )));
        }
        let span = t_end - s.t;
        if span == 0.0 {
            return Ok(s.clone());
        }
        let steps = usize::max(1, libm::ceil(span / self.cfg.dt) as usize);
        let dt = span / steps as f64;
        let mut state = s.clone();
        let mut forcing = None;
        for _ in 0..steps {
            let (next, ef) = self.step_with(&state, dt, forcing.as_ref())?;
            state = next;
            forcing = Some(ef);
        }
        Ok(state)
    }
}

/// Truncation level of the reconstructed two-scale fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionOrder {
    /// Carrier harmonics only.
    Leading,
    /// Plus the first-order harmonic corrections and mean elevation.
    First,
    /// Plus the mean flow and every second-order amplitude.
    Full,
}

fn place(
    target: &mut SpectralField,
    env: &SpectralField,
    carrier_kappa: [i64; 2],
    phase: Complex64,
) -> Result<()> {
    let fine = target.grid().clone();
    let coarse = env.grid().clone();
    let half = (fine.n() / 2) as i64;
    for mode in coarse.modes() {
        let c = env.coeffs()[mode.idx];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut kappa = [0i64; 2];
        for a in 0..fine.dim() {
            kappa[a] = carrier_kappa[a] + mode.kappa[a];
            if kappa[a] <= -half || kappa[a] >= half {
                return Err(WaveError::InvalidArgument(format!(
                    "fine grid with {} points cannot hold harmonic mode {}",
                    fine.n(),
                    kappa[a]
                )));
            }
        }
        let idx = fine.flat(kappa);
        target.coeffs_mut()[idx] += phase * c;
    }
    Ok(())
}

fn carrier_kappa(xi: [f64; 2], scale: f64, dim: usize) -> Result<[i64; 2]> {
    let mut out = [0i64; 2];
    for a in 0..dim {
        let x = xi[a] * scale;
        let r = libm::round(x);
        if real::abs(x - r) > 1e-9 {
            return Err(WaveError::Incommensurable(format!(
                "carrier component {} is not resolved by the periodic fine grid",
                xi[a]
            )));
        }
        out[a] = r as i64;
    }
    Ok(out)
}

/// Assemble the oscillatory surface fields `(zeta, psi)` on a fine periodic
/// grid of `fine_n` points per axis at fine time `t`, where the coefficient
/// hierarchy `cs` holds the slow envelopes at slow time `eps t`.  The fine
/// domain is the slow domain stretched by `1/eps`, which must map every
/// carrier onto an integer fine mode.
pub fn reconstruct(
    cs: &CoefficientSet,
    order: ReconstructionOrder,
    eps: f64,
    fine_n: usize,
    t: f64,
) -> Result<(SpectralField, SpectralField)> {
    if eps <= 0.0 {
        return Err(WaveError::InvalidArgument(alloc::string::String::from(
            "the scale ratio must be positive",
        )));
    }
    let dim = cs.grid.dim();
    let fine = Grid::new(dim, fine_n, cs.grid.len() / eps)?;
    // carrier xi maps to fine mode xi L_fine / (2 pi)
    let scale = fine.len() / (2.0 * core::f64::consts::PI);
    let rot = |omega: f64| {
        Complex64::new(real::cos(omega * t), -real::sin(omega * t))
    };

    // harmonic parts (completed by complex conjugates) and mean parts
    let mut hz = SpectralField::zeros(&fine, false);
    let mut hp = SpectralField::zeros(&fine, false);
    let mut mz = SpectralField::zeros(&fine, false);
    let mut mp = SpectralField::zeros(&fine, false);

    for j in 0..3 {
        let w = &cs.waves.waves[j];
        let ck = carrier_kappa(w.xi, scale, dim)?;
        let ph = rot(w.omega);
        place(&mut hz, &cs.zeta0[j].value, ck, ph)?;
        place(&mut hp, &cs.psi0[j].value, ck, ph)?;
        if order == ReconstructionOrder::Leading {
            continue;
        }
        place(&mut hz, &cs.zeta1[j].value, ck, ph * re(eps))?;
        place(&mut hp, &cs.psi1[j].value, ck, ph * re(eps))?;
        if order == ReconstructionOrder::Full {
            place(&mut hz, &cs.zeta2[j], ck, ph * re(eps * eps))?;
        }
    }

    if order != ReconstructionOrder::Leading {
        for block in cs.pairs.iter().filter(|b| b.merged_into.is_none()) {
            let ck = carrier_kappa(block.entry.xi, scale, dim)?;
            let ph = rot(block.entry.omega);
            place(&mut hz, &block.zeta1.value, ck, ph * re(eps))?;
            place(&mut hp, &block.psi1.value, ck, ph * re(eps))?;
            if order == ReconstructionOrder::Full {
                place(&mut hz, &block.zeta2, ck, ph * re(eps * eps))?;
                place(&mut hp, &block.psi2, ck, ph * re(eps * eps))?;
            }
        }
        place(&mut mz, &cs.zeta10.value, [0, 0], re(eps))?;
    }

    if order == ReconstructionOrder::Full {
        for block in cs
            .triples
            .iter()
            .filter(|b| b.merged_into.is_none() && b.routed_to.is_none())
        {
            let ck = carrier_kappa(block.entry.xi, scale, dim)?;
            let ph = rot(block.entry.omega) * re(eps * eps);
            place(&mut hz, &block.zeta2, ck, ph)?;
            place(&mut hp, &block.psi2, ck, ph)?;
        }
        place(&mut mp, &cs.psi00.value, [0, 0], ONE)?;
        place(&mut mz, &cs.zeta20, [0, 0], re(eps * eps))?;
    }

    let mut zeta = hz.add(&hz.conj_field())?;
    zeta.add_scaled(ONE, &mz)?;
    let mut psi = hp.add(&hp.conj_field())?;
    psi.add_scaled(ONE, &mp)?;
    zeta.set_real_flag(true);
    psi.set_real_flag(true);
    Ok((zeta, psi))
}

/// Drop every envelope coefficient above the fraction `frac` of the slow
/// Nyquist mode (band-limited well-prepared data).
pub fn band_limit(f: &SpectralField, frac: f64) -> SpectralField {
    let mut out = f.clone();
    let cut = (frac * (f.grid().n() as f64) / 2.0) as i64;
    for mode in f.grid().modes() {
        if mode.kappa[0].abs() > cut || mode.kappa[1].abs() > cut {
            out.coeffs_mut()[mode.idx] = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// All reconstruction data sampled at one slow time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub zeta: SpectralField,
    pub psi: SpectralField,
}

impl MacroSolver {
    /// Integrate and reconstruct at each requested slow time.
    pub fn sample(
        &self,
        s: &MacroState,
        times: &[f64],
        order: ReconstructionOrder,
        eps: f64,
        fine_n: usize,
    ) -> Result<Vec<Snapshot>> {
        let mut state = s.clone();
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            state = self.integrate(&state, t)?;
            let cs = self.coefficient_set(&state)?;
            let (zeta, psi) = reconstruct(&cs, order, eps, fine_n, t / eps)?;
            out.push(Snapshot { t, zeta, psi });
        }
        Ok(out)
    }
}
