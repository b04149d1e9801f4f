//! Scalar math shims so the crate stays `no_std`: every transcendental call
//! routes through `libm`.

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub fn powi(x: f64, n: i32) -> f64 {
    let mut r = 1.0;
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            r *= base;
        }
        base *= base;
        e >>= 1;
    }
    r
}

/// `tanh` with a hard clamp to 1 for large arguments, where the difference
/// is far below double precision anyway.
pub fn tanh_clamped(x: f64) -> f64 {
    if x > 40.0 {
        1.0
    } else if x < -40.0 {
        -1.0
    } else {
        libm::tanh(x)
    }
}

pub fn hypot2(x: f64, y: f64) -> f64 {
    sqrt(x * x + y * y)
}
