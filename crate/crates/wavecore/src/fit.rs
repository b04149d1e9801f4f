//! Least-squares slope fitting in log-log coordinates, used by every
//! convergence and residual study.

use alloc::vec::Vec;

use crate::real;

/// Result of a log-log least-squares fit `log y = slope * log x + intercept`.
#[derive(Debug, Clone)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Per-point residuals `log y_i - (slope * log x_i + intercept)`.
    pub residuals: Vec<f64>,
}

/// Fit a power law through `(x_i, y_i)` pairs (all positive).
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> SlopeFit {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|&x| real::ln(x)).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| real::ln(y)).collect();
    let n = lx.len() as f64;
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|v| v * v).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residuals = lx
        .iter()
        .zip(ly.iter())
        .map(|(&x, &y)| y - (slope * x + intercept))
        .collect();
    SlopeFit { slope, intercept, residuals }
}
