//! Full free-surface evolution, diagnostics, and the consistency residual.
//!
//! The reference dynamics is the Zakharov/Craig-Sulem formulation on the
//! periodic surface grid,
//!
//! ```text
//! dt zeta = G[eps zeta] psi,
//! dt psi  = - zeta + (1/Bo) div( grad zeta / sqrt(1 + eps^2 |grad zeta|^2) )
//!           - (eps/2) |grad psi|^2
//!           + (eps/2) (G[eps zeta]psi + eps grad zeta . grad psi)^2
//!             / (1 + eps^2 |grad zeta|^2),
//! ```
//!
//! advanced by classical fourth-order explicit steps with dealiased products
//! and the truncated Dirichlet-Neumann expansion.  The module also carries
//! the strict-hyperbolicity field `a = 1 - b1`, the Sobolev error metric
//! `sqrt(|dzeta|_{H^{N-1}}^2 + |grad dpsi|_{H^{N-2}}^2)`, the energy
//! functional built on the weight `|D|/(1 + sqrt(mu)|D|)^{1/2}`, the
//! Hamiltonian, and a residual evaluator that differentiates an arbitrary
//! time-indexed surface provider with a sixth-order stencil and measures how
//! well it satisfies the evolution equations.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dispersion::{g0, PhysicalParams};
use crate::dno::{dno_apply, w_velocity, DnoConfig, P_multiplier};
use crate::error::WaveError;
use crate::field::SpectralField;
use crate::real;
use crate::Result;

/// Surface elevation and velocity-potential trace at a fixed time.
#[derive(Debug, Clone)]
pub struct SurfaceState {
    /// Microscopic time stamp.
    pub t: f64,
    /// Surface elevation (real field).
    pub zeta: SpectralField,
    /// Potential trace at the surface (real field).
    pub psi: SpectralField,
}

impl SurfaceState {
    /// Bundle two real fields on a common grid into a state.
    pub fn new(t: f64, zeta: SpectralField, psi: SpectralField) -> Result<SurfaceState> {
        if zeta.grid() != psi.grid() {
            return Err(WaveError::GridMismatch);
        }
        if !zeta.is_real() || !psi.is_real() {
            return Err(WaveError::InvalidArgument(alloc::string::String::from(
                "surface states must be real fields",
            )));
        }
        Ok(SurfaceState { t, zeta, psi })
    }

    /// The common grid of both components.
    pub fn grid(&self) -> &crate::grid::Grid {
        self.zeta.grid()
    }

    /// True when every coefficient of both components is finite.
    pub fn is_finite(&self) -> bool {
        self.zeta.is_finite() && self.psi.is_finite()
    }
}

fn grad_values(f: &SpectralField) -> Vec<Vec<Complex64>> {
    (0..f.grid().dim()).map(|axis| f.deriv(axis).to_values()).collect()
}

/// Time derivative `(dt zeta, dt psi)` of the full system, dealiased.
pub fn rhs(
    u: &SurfaceState,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<(SpectralField, SpectralField)> {
    let eps = p.epsilon;
    let grid = u.grid().clone();
    let gz = dno_apply(&u.zeta, &u.psi, eps, cfg, p)?;
    let gzv = gz.to_values();
    let zv = u.zeta.to_values();
    let dz = grad_values(&u.zeta);
    let dp = grad_values(&u.psi);
    let total = grid.total();

    let mut out = vec![Complex64::default(); total];
    for i in 0..total {
        let mut grad_z_sq = 0.0;
        let mut grad_p_sq = 0.0;
        let mut cross = 0.0;
        for axis in 0..grid.dim() {
            grad_z_sq += dz[axis][i].re * dz[axis][i].re;
            grad_p_sq += dp[axis][i].re * dp[axis][i].re;
            cross += dz[axis][i].re * dp[axis][i].re;
        }
        let den = 1.0 + eps * eps * grad_z_sq;
        let w = gzv[i].re + eps * cross;
        out[i] = Complex64::new(
            -zv[i].re - 0.5 * eps * grad_p_sq + 0.5 * eps * w * w / den,
            0.0,
        );
    }
    let mut dpsi = SpectralField::from_values(&grid, &out, true)?;

    if p.inv_bond > 0.0 {
        for axis in 0..grid.dim() {
            let mut flux = vec![Complex64::default(); total];
            for i in 0..total {
                let mut grad_z_sq = 0.0;
                for a in 0..grid.dim() {
                    grad_z_sq += dz[a][i].re * dz[a][i].re;
                }
                let den = real::sqrt(1.0 + eps * eps * grad_z_sq);
                flux[i] = Complex64::new(dz[axis][i].re / den, 0.0);
            }
            let flux = SpectralField::from_values(&grid, &flux, true)?;
            dpsi.add_scaled(Complex64::new(p.inv_bond, 0.0), &flux.deriv(axis))?;
        }
    }
    Ok((gz, dpsi.dealias(cfg.dealias_frac)))
}

/// Largest temporal frequency resolved by the grid's modes.
fn omega_max(grid: &crate::grid::Grid, p: &PhysicalParams) -> f64 {
    let mut worst = 0.0;
    for mode in grid.modes() {
        let w = crate::dispersion::omega(mode.k, p);
        if w > worst {
            worst = w;
        }
    }
    worst
}

fn axpy(u: &SurfaceState, s: f64, dz: &SpectralField, dp: &SpectralField, t: f64) -> SurfaceState {
    let mut zeta = u.zeta.clone();
    let mut psi = u.psi.clone();
    zeta.add_scaled(Complex64::new(s, 0.0), dz).unwrap();
    psi.add_scaled(Complex64::new(s, 0.0), dp).unwrap();
    SurfaceState { t, zeta, psi }
}

fn rk4_step(u: &SurfaceState, dt: f64, cfg: &DnoConfig, p: &PhysicalParams) -> Result<SurfaceState> {
    let (k1z, k1p) = rhs(u, cfg, p)?;
    let (k2z, k2p) = rhs(&axpy(u, 0.5 * dt, &k1z, &k1p, u.t), cfg, p)?;
    let (k3z, k3p) = rhs(&axpy(u, 0.5 * dt, &k2z, &k2p, u.t), cfg, p)?;
    let (k4z, k4p) = rhs(&axpy(u, dt, &k3z, &k3p, u.t), cfg, p)?;
    let mut out = u.clone();
    out.t += dt;
    for (s, dz, dp) in [
        (dt / 6.0, &k1z, &k1p),
        (dt / 3.0, &k2z, &k2p),
        (dt / 3.0, &k3z, &k3p),
        (dt / 6.0, &k4z, &k4p),
    ] {
        out.zeta.add_scaled(Complex64::new(s, 0.0), dz)?;
        out.psi.add_scaled(Complex64::new(s, 0.0), dp)?;
    }
    if !out.is_finite() {
        return Err(WaveError::NumericalAbort { t: out.t });
    }
    Ok(out)
}

/// Advance a state to `t_end` with uniform fourth-order steps of size `<= dt`.
pub fn integrate_ww(
    u0: &SurfaceState,
    t_end: f64,
    dt: f64,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<SurfaceState> {
    let span = t_end - u0.t;
    if span < 0.0 {
        return Err(WaveError::InvalidArgument(alloc::string::String::from(
            "target time precedes the state",
        )));
    }
    if !(dt > 0.0) {
        return Err(WaveError::InvalidArgument(alloc::string::String::from(
            "step size must be positive",
        )));
    }
    let fastest = omega_max(u0.grid(), p);
    if dt * fastest * 10.0 > core::f64::consts::PI {
        return Err(WaveError::InvalidArgument(alloc::string::String::from(
            "step size must give at least 20 steps per fastest grid period",
        )));
    }
    if span == 0.0 {
        return Ok(u0.clone());
    }
    let steps = libm::ceil(span / dt) as usize;
    let h = span / steps as f64;
    let mut u = u0.clone();
    for _ in 0..steps {
        u = rk4_step(&u, h, cfg, p)?;
    }
    u.t = t_end;
    Ok(u)
}

/// States at the requested non-decreasing times `>= u0.t`.
pub fn trajectory(
    u0: &SurfaceState,
    times: &[f64],
    dt: f64,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<Vec<SurfaceState>> {
    let mut out = Vec::with_capacity(times.len());
    let mut u = u0.clone();
    for &t in times {
        u = integrate_ww(&u, t, dt, cfg, p)?;
        out.push(u.clone());
    }
    Ok(out)
}

fn values_product(a: &[Complex64], b: &[Complex64], grid: &crate::grid::Grid, frac: f64) -> SpectralField {
    let prod: Vec<Complex64> =
        a.iter().zip(b.iter()).map(|(x, y)| Complex64::new(x.re * y.re, 0.0)).collect();
    SpectralField::from_values(grid, &prod, true).unwrap().dealias(frac)
}

/// The scalar subprincipal field `b1` at unit steepness.
fn b1_field(
    zeta: &SpectralField,
    psi: &SpectralField,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<SpectralField> {
    let grid = zeta.grid().clone();
    let total = grid.total();
    let gz = dno_apply(zeta, psi, 1.0, cfg, p)?;
    let w = w_velocity(zeta, psi, cfg, p)?;
    let gzv = gz.to_values();
    let wv = w.to_values();
    let zv = zeta.to_values();
    let dz = grad_values(zeta);
    let dp = grad_values(psi);
    let dw = grad_values(&w);

    // second component of the unit-steepness gravity flow map
    let mut n2 = vec![Complex64::default(); total];
    for i in 0..total {
        let mut grad_z_sq = 0.0;
        let mut grad_p_sq = 0.0;
        let mut cross = 0.0;
        for axis in 0..grid.dim() {
            grad_z_sq += dz[axis][i].re * dz[axis][i].re;
            grad_p_sq += dp[axis][i].re * dp[axis][i].re;
            cross += dz[axis][i].re * dp[axis][i].re;
        }
        let den = 1.0 + grad_z_sq;
        let vert = gzv[i].re + cross;
        n2[i] = Complex64::new(zv[i].re + 0.5 * grad_p_sq - 0.5 * vert * vert / den, 0.0);
    }
    let n2 = SpectralField::from_values(&grid, &n2, true)?.dealias(cfg.dealias_frac);
    let term1 = w_velocity(zeta, &n2, cfg, p)?.to_values();

    // tangential-flux divergence: div(grad psi - w grad zeta)
    let mut div_flux = SpectralField::zeros(&grid, true);
    for axis in 0..grid.dim() {
        let mut flux = vec![Complex64::default(); total];
        for i in 0..total {
            flux[i] = Complex64::new(dp[axis][i].re - wv[i].re * dz[axis][i].re, 0.0);
        }
        let flux = SpectralField::from_values(&grid, &flux, true)?.dealias(cfg.dealias_frac);
        div_flux.add_scaled(Complex64::new(1.0, 0.0), &flux.deriv(axis))?;
    }
    let div_flux = div_flux.to_values();

    let wg = values_product(&wv, &gzv, &grid, cfg.dealias_frac);
    let g_wg = dno_apply(zeta, &wg, 1.0, cfg, p)?.to_values();
    let dg = grad_values(&gz);

    let mut out = vec![Complex64::default(); total];
    for i in 0..total {
        let mut grad_z_sq = 0.0;
        let mut tangent = 0.0;
        let mut slope_grad_g = 0.0;
        for axis in 0..grid.dim() {
            grad_z_sq += dz[axis][i].re * dz[axis][i].re;
            tangent += (dp[axis][i].re - wv[i].re * dz[axis][i].re) * dw[axis][i].re;
            slope_grad_g += dz[axis][i].re * dg[axis][i].re;
        }
        let num = g_wg[i].re + gzv[i].re * div_flux[i].re + slope_grad_g * wv[i].re;
        out[i] = Complex64::new(term1[i].re - tangent + num / (1.0 + grad_z_sq), 0.0);
    }
    SpectralField::from_values(&grid, &out, true)
}

/// Strict-hyperbolicity field `a = 1 - b1(eps U)` and its pointwise minimum.
pub fn hyperbolicity(
    u: &SurfaceState,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<(SpectralField, f64)> {
    let eps = Complex64::new(p.epsilon, 0.0);
    let b1 = b1_field(&u.zeta.scale(eps), &u.psi.scale(eps), cfg, p)?;
    let grid = u.grid().clone();
    let vals = b1.to_values();
    let mut out = vec![Complex64::default(); grid.total()];
    let mut min = f64::INFINITY;
    for (o, v) in out.iter_mut().zip(vals.iter()) {
        let a = 1.0 - v.re;
        *o = Complex64::new(a, 0.0);
        if a < min {
            min = a;
        }
    }
    let field = SpectralField::from_values(&grid, &out, true)?;
    Ok((field, min))
}

/// Sobolev distance `sqrt(|dzeta|_{H^{N-1}}^2 + |grad dpsi|_{H^{N-2}}^2)`.
pub fn error_norm(u: &SurfaceState, v: &SurfaceState, n_index: f64) -> Result<f64> {
    let dz = u.zeta.sub(&v.zeta)?;
    let dpsi = u.psi.sub(&v.psi)?;
    let mut acc = dz.sobolev_norm(n_index - 1.0);
    acc *= acc;
    for axis in 0..u.grid().dim() {
        let g = dpsi.deriv(axis).sobolev_norm(n_index - 2.0);
        acc += g * g;
    }
    Ok(real::sqrt(acc))
}

fn multi_indices(dim: usize, max: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    if dim == 1 {
        for a in 0..=max {
            out.push([a, 0]);
        }
    } else {
        for a in 0..=max {
            for b in 0..=(max - a) {
                out.push([a, b]);
            }
        }
    }
    out
}

fn deriv_multi(f: &SpectralField, alpha: [usize; 2]) -> SpectralField {
    let mut out = f.clone();
    for _ in 0..alpha[0] {
        out = out.deriv(0);
    }
    for _ in 0..alpha[1] {
        out = out.deriv(1);
    }
    out
}

/// Energy functional with the good-unknown correction in the trace slots.
pub fn energy_norm(
    u: &SurfaceState,
    n_index: usize,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<f64> {
    let eps = Complex64::new(p.epsilon, 0.0);
    let grid = u.grid().clone();
    let w = w_velocity(&u.zeta.scale(eps), &u.psi.scale(eps), cfg, p)?;
    let wv = w.to_values();

    let base = P_multiplier(&u.psi, p).sobolev_norm(3.0);
    let mut acc = base * base;
    for alpha in multi_indices(grid.dim(), n_index) {
        let dzeta = deriv_multi(&u.zeta, alpha);
        let z = dzeta.l2_norm();
        acc += z * z;
        let trace = if alpha == [0, 0] {
            u.psi.clone()
        } else {
            let dpsi = deriv_multi(&u.psi, alpha);
            let dzv = dzeta.to_values();
            let mut vals = dpsi.to_values();
            for (v, (wi, zi)) in vals.iter_mut().zip(wv.iter().zip(dzv.iter())) {
                *v -= Complex64::new(wi.re * zi.re, 0.0);
            }
            SpectralField::from_values(&grid, &vals, true)?.dealias(cfg.dealias_frac)
        };
        let s = P_multiplier(&trace, p).l2_norm();
        acc += s * s;
    }
    Ok(real::sqrt(acc))
}

/// Conserved energy `1/2 int(psi G[eps zeta]psi + zeta^2) + capillary area`.
pub fn hamiltonian(u: &SurfaceState, cfg: &DnoConfig, p: &PhysicalParams) -> Result<f64> {
    let eps = p.epsilon;
    let gz = dno_apply(&u.zeta, &u.psi, eps, cfg, p)?;
    let mut h = 0.5 * (u.psi.inner(&gz)?.re + u.zeta.inner(&u.zeta)?.re);
    if p.inv_bond > 0.0 {
        let grid = u.grid();
        let dz = grad_values(&u.zeta);
        let weight = grid.volume() / grid.total() as f64;
        let mut area = 0.0;
        for i in 0..grid.total() {
            let mut grad_z_sq = 0.0;
            for axis in 0..grid.dim() {
                grad_z_sq += dz[axis][i].re * dz[axis][i].re;
            }
            area += real::sqrt(1.0 + eps * eps * grad_z_sq) - 1.0;
        }
        h += p.inv_bond / (eps * eps) * area * weight;
    }
    Ok(h)
}

/// Sixth-order centered differentiation weights at unit spacing.
const TIME_STENCIL: [(i32, f64); 6] = [
    (-3, -1.0 / 60.0),
    (-2, 3.0 / 20.0),
    (-1, -3.0 / 4.0),
    (1, 3.0 / 4.0),
    (2, -3.0 / 20.0),
    (3, 1.0 / 60.0),
];

/// Scale-free residual norms of a time-indexed surface family at one instant.
#[derive(Debug, Clone, Copy)]
pub struct ResidualSample {
    /// Sample time.
    pub t: f64,
    /// Root-mean-square of the kinematic residual.
    pub zeta_l2: f64,
    /// First-order Sobolev root-mean-square of the kinematic residual.
    pub zeta_h1: f64,
    /// Root-mean-square of the dynamic residual.
    pub psi_l2: f64,
    /// Root-mean-square of the dynamic residual under the energy weight.
    pub psi_weighted: f64,
}

impl ResidualSample {
    /// Euclidean combination of the two plain component norms.
    pub fn combined(&self) -> f64 {
        real::sqrt(self.zeta_l2 * self.zeta_l2 + self.psi_l2 * self.psi_l2)
    }
}

fn rms(f: &SpectralField, s: f64) -> f64 {
    f.sobolev_norm(s) / real::sqrt(f.grid().volume())
}

/// Measure how well `provider` solves the evolution at each sample time.
///
/// The time derivative is formed from provider states at `t + k*delta`,
/// `k = -3..3`, with sixth-order weights; the flow map is evaluated on the
/// state at `t` itself.
pub fn residual_evaluator<F>(
    provider: &mut F,
    times: &[f64],
    delta: f64,
    cfg: &DnoConfig,
    p: &PhysicalParams,
) -> Result<Vec<ResidualSample>>
where
    F: FnMut(f64) -> Result<SurfaceState>,
{
    if !(delta > 0.0) {
        return Err(WaveError::InvalidArgument(alloc::string::String::from(
            "differencing step must be positive",
        )));
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let center = provider(t)?;
        let grid = center.grid().clone();
        let mut dt_zeta = SpectralField::zeros(&grid, true);
        let mut dt_psi = SpectralField::zeros(&grid, true);
        for (k, wgt) in TIME_STENCIL {
            let s = provider(t + k as f64 * delta)?;
            let scale = Complex64::new(wgt / delta, 0.0);
            dt_zeta.add_scaled(scale, &s.zeta)?;
            dt_psi.add_scaled(scale, &s.psi)?;
        }
        let (fz, fp) = rhs(&center, cfg, p)?;
        let r1 = dt_zeta.sub(&fz)?;
        let r2 = dt_psi.sub(&fp)?;
        out.push(ResidualSample {
            t,
            zeta_l2: rms(&r1, 0.0),
            zeta_h1: rms(&r1, 1.0),
            psi_l2: rms(&r2, 0.0),
            psi_weighted: rms(&P_multiplier(&r2, p), 0.0),
        });
    }
    Ok(out)
}

/// Convenience: the flat-surface linear frequency of a lattice mode.
pub fn mode_frequency(kappa: [i64; 2], grid: &crate::grid::Grid, p: &PhysicalParams) -> f64 {
    let dk = grid.dk();
    let k = [kappa[0] as f64 * dk, kappa[1] as f64 * dk];
    real::sqrt(crate::dispersion::bfun(k, p) * g0(k, p))
}
