//! Finite-depth dispersion function for gravity/capillary-gravity waves,
//! its gradients and Hessians, and the per-carrier derived scalars.
//!
//! With depth `sqrt(mu)` and inverse Bond number `1/Bo`, the linear theory is
//! governed by
//!
//! ```text
//! g0(xi)    = |xi| tanh(sqrt(mu) |xi|)
//! b(xi)     = 1 + (1/Bo) |xi|^2
//! omega(xi) = sqrt(b(xi) g0(xi))
//! ```
//!
//! Everything here is radial, so gradients and Hessians are assembled from
//! closed-form radial derivatives.  `omega` behaves like `mu^(1/4) |xi|` near
//! the origin and is not differentiable there; its derivatives are an error
//! at `xi = 0` rather than a limit value.

use crate::error::WaveError;
use crate::real;
use crate::Result;

/// Global scaling context: depth, surface tension, steepness, dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Shallowness parameter `mu >= 1`; the water depth is `sqrt(mu)`.
    pub mu: f64,
    /// Inverse Bond number `1/Bo >= 0`; zero for pure gravity waves.
    pub inv_bond: f64,
    /// Wave steepness `eps` in (0, 1].
    pub epsilon: f64,
    /// Horizontal dimension, 1 or 2.
    pub dim: usize,
}

impl PhysicalParams {
    pub fn new(mu: f64, inv_bond: f64, epsilon: f64, dim: usize) -> Result<PhysicalParams> {
        if !(mu >= 1.0) || !mu.is_finite() {
            return Err(WaveError::InvalidArgument(alloc::string::String::from("mu must be >= 1")));
        }
        if !(inv_bond >= 0.0) {
            return Err(WaveError::InvalidArgument(alloc::string::String::from(
                "inverse Bond number must be >= 0",
            )));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(WaveError::InvalidArgument(alloc::string::String::from(
                "epsilon must be in (0, 1]",
            )));
        }
        if dim != 1 && dim != 2 {
            return Err(WaveError::InvalidArgument(alloc::string::String::from(
                "dimension must be 1 or 2",
            )));
        }
        Ok(PhysicalParams { mu, inv_bond, epsilon, dim })
    }

    /// Pure-gravity parameters (`1/Bo = 0`).
    pub fn gravity(mu: f64, epsilon: f64, dim: usize) -> Result<PhysicalParams> {
        PhysicalParams::new(mu, 0.0, epsilon, dim)
    }
}

fn norm(xi: [f64; 2]) -> f64 {
    real::hypot2(xi[0], xi[1])
}

/// Radial value and first two radial derivatives of `g0`.
fn g0_radial(r: f64, mu: f64) -> (f64, f64, f64) {
    let a = real::sqrt(mu);
    let t = real::tanh_clamped(a * r);
    let sech2 = 1.0 - t * t;
    let f = r * t;
    let f1 = t + a * r * sech2;
    let f2 = 2.0 * a * sech2 - 2.0 * a * a * r * sech2 * t;
    (f, f1, f2)
}

/// `g0(xi) = |xi| tanh(sqrt(mu) |xi|)`.
pub fn g0(xi: [f64; 2], p: &PhysicalParams) -> f64 {
    let r = norm(xi);
    r * real::tanh_clamped(real::sqrt(p.mu) * r)
}

/// Gradient of `g0`; zero at the origin (the radial slope vanishes there).
pub fn grad_g0(xi: [f64; 2], p: &PhysicalParams) -> [f64; 2] {
    let r = norm(xi);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let (_, f1, _) = g0_radial(r, p.mu);
    [f1 * xi[0] / r, f1 * xi[1] / r]
}

/// Hessian of `g0`; equals `2 sqrt(mu) I` at the origin.
pub fn hessian_g0(xi: [f64; 2], p: &PhysicalParams) -> [[f64; 2]; 2] {
    let r = norm(xi);
    let a = real::sqrt(p.mu);
    if r == 0.0 {
        return [[2.0 * a, 0.0], [0.0, 2.0 * a]];
    }
    let (_, f1, f2) = g0_radial(r, p.mu);
    radial_hessian(xi, r, f1, f2)
}

/// `b(xi) = 1 + (1/Bo)|xi|^2`.
pub fn bfun(xi: [f64; 2], p: &PhysicalParams) -> f64 {
    1.0 + p.inv_bond * (xi[0] * xi[0] + xi[1] * xi[1])
}

/// `omega(xi) = sqrt(b(xi) g0(xi))`.
pub fn omega(xi: [f64; 2], p: &PhysicalParams) -> f64 {
    real::sqrt(bfun(xi, p) * g0(xi, p))
}

/// Radial value and first two radial derivatives of `omega` (r > 0).
fn omega_radial(r: f64, p: &PhysicalParams) -> (f64, f64, f64) {
    let (f, f1, f2) = g0_radial(r, p.mu);
    let b = 1.0 + p.inv_bond * r * r;
    let b1 = 2.0 * p.inv_bond * r;
    let b2 = 2.0 * p.inv_bond;
    let w = real::sqrt(b * f);
    let w1 = (b1 * f + b * f1) / (2.0 * w);
    let w2 = (b2 * f + 2.0 * b1 * f1 + b * f2) / (2.0 * w) - w1 * w1 / w;
    (w, w1, w2)
}

/// Group velocity `grad omega(xi)`; an error at the non-smooth point `xi=0`.
pub fn grad_omega(xi: [f64; 2], p: &PhysicalParams) -> Result<[f64; 2]> {
    let r = norm(xi);
    if r < 1e-14 {
        return Err(WaveError::SingularPoint);
    }
    let (_, w1, _) = omega_radial(r, p);
    Ok([w1 * xi[0] / r, w1 * xi[1] / r])
}

/// Hessian of `omega`; an error at `xi=0`.
pub fn hessian_omega(xi: [f64; 2], p: &PhysicalParams) -> Result<[[f64; 2]; 2]> {
    let r = norm(xi);
    if r < 1e-14 {
        return Err(WaveError::SingularPoint);
    }
    let (_, w1, w2) = omega_radial(r, p);
    Ok(radial_hessian(xi, r, w1, w2))
}

fn radial_hessian(xi: [f64; 2], r: f64, f1: f64, f2: f64) -> [[f64; 2]; 2] {
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let p = xi[a] * xi[b] / (r * r);
            let delta = if a == b { 1.0 } else { 0.0 };
            h[a][b] = f2 * p + (f1 / r) * (delta - p);
        }
    }
    h
}

/// One carrier wave with all derived per-wave dispersion data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveComponent {
    pub xi: [f64; 2],
    pub omega: f64,
    pub b: f64,
    pub g: f64,
    pub grad_g: [f64; 2],
    pub group_velocity: [f64; 2],
    pub bo_velocity: [f64; 2],
    pub hessian_omega: [[f64; 2]; 2],
}

impl WaveComponent {
    pub fn new(xi: [f64; 2], p: &PhysicalParams) -> Result<WaveComponent> {
        if norm(xi) < 1e-14 {
            return Err(WaveError::InvalidArgument(alloc::string::String::from(
                "carrier wave vector must be nonzero",
            )));
        }
        let gv = grad_omega(xi, p)?;
        let w = omega(xi, p);
        let b = bfun(xi, p);
        Ok(WaveComponent {
            xi,
            omega: w,
            b,
            g: g0(xi, p),
            grad_g: grad_g0(xi, p),
            group_velocity: gv,
            bo_velocity: bo_velocity_raw(xi, w, b, gv, p),
            hessian_omega: hessian_omega(xi, p)?,
        })
    }

    /// `|xi|^2` of the carrier.
    pub fn xi_sq(&self) -> f64 {
        self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]
    }
}

fn bo_velocity_raw(
    xi: [f64; 2],
    omega: f64,
    b: f64,
    grad_omega: [f64; 2],
    p: &PhysicalParams,
) -> [f64; 2] {
    let s = p.inv_bond * 2.0 * omega / b;
    [(grad_omega[0] - s * xi[0]) / b, (grad_omega[1] - s * xi[1]) / b]
}

/// The surface-tension-corrected transport velocity of a carrier.
pub fn bo_velocity(j: &WaveComponent, p: &PhysicalParams) -> [f64; 2] {
    bo_velocity_raw(j.xi, j.omega, j.b, j.group_velocity, p)
}

/// Residual of the gradient identity `2 omega grad omega = b g' + (2/Bo) xi g`,
/// normalized by the magnitude of the left side.
pub fn gradient_identity_residual(xi: [f64; 2], p: &PhysicalParams) -> Result<f64> {
    let w = omega(xi, p);
    let gw = grad_omega(xi, p)?;
    let b = bfun(xi, p);
    let g = g0(xi, p);
    let gg = grad_g0(xi, p);
    let mut num = 0.0;
    let mut den = 0.0;
    for a in 0..2 {
        let lhs = 2.0 * w * gw[a];
        let rhs = b * gg[a] + 2.0 * p.inv_bond * xi[a] * g;
        num += (lhs - rhs) * (lhs - rhs);
        den += lhs * lhs;
    }
    Ok(real::sqrt(num) / real::sqrt(den.max(1.0)))
}
