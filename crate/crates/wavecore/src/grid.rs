//! Periodic grids with a baked-in radix-2 FFT plan.
//!
//! A [`Grid`] is a 1- or 2-dimensional torus of period `len` per axis sampled
//! at `n` (power-of-two) points per axis.  Wavenumbers are represented by
//! integer indices `kappa` in `(-n/2, n/2]` per axis; the physical wavenumber
//! is `kappa * 2*pi/len`.  The unpaired Nyquist index `n/2` is tracked
//! explicitly so real fields can stay real under multiplier application.
//!
//! Grids are cheap to clone (the twiddle tables are shared) and all transform
//! routines are reentrant: they work on caller-owned buffers only.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::WaveError;
use crate::real;
use crate::Result;

#[derive(Debug)]
struct GridData {
    dim: usize,
    n: usize,
    len: f64,
    /// Forward twiddles `exp(-2*pi*i*j/n)` for `j < n/2`.
    twiddles: Vec<Complex64>,
    /// Bit-reversal permutation for the radix-2 passes.
    bitrev: Vec<usize>,
}

/// A periodic grid shared by all fields that live on it.
#[derive(Debug, Clone)]
pub struct Grid {
    data: Arc<GridData>,
}

/// One lattice point: flat coefficient index, integer index pair and
/// physical wavenumber pair (second component zero when `dim == 1`).
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub idx: usize,
    pub kappa: [i64; 2],
    pub k: [f64; 2],
}

impl Mode {
    /// `|k|^2` of the physical wavenumber.
    pub fn k_sq(&self) -> f64 {
        self.k[0] * self.k[0] + self.k[1] * self.k[1]
    }

    /// `|k|` of the physical wavenumber.
    pub fn k_abs(&self) -> f64 {
        real::sqrt(self.k_sq())
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.data.dim == other.data.dim
            && self.data.n == other.data.n
            && self.data.len == other.data.len
    }
}

impl Grid {
    /// Build a grid with `dim` in {1,2}, power-of-two `n >= 8` points per
    /// axis and physical period `len > 0` per axis.
    pub fn new(dim: usize, n: usize, len: f64) -> Result<Grid> {
        if dim != 1 && dim != 2 {
            return Err(WaveError::InvalidGrid(String::from("dimension must be 1 or 2")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(WaveError::InvalidGrid(String::from(
                "points per axis must be a power of two >= 8",
            )));
        }
        if !(len > 0.0) || !len.is_finite() {
            return Err(WaveError::InvalidGrid(String::from("period must be positive")));
        }
        let mut twiddles = Vec::with_capacity(n / 2);
        for j in 0..n / 2 {
            let phi = -2.0 * PI * (j as f64) / (n as f64);
            twiddles.push(Complex64::new(real::cos(phi), real::sin(phi)));
        }
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| (i.reverse_bits() >> (usize::BITS - bits)) & (n - 1))
            .collect();
        Ok(Grid {
            data: Arc::new(GridData { dim, n, len, twiddles, bitrev }),
        })
    }

    pub fn dim(&self) -> usize {
        self.data.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.data.n
    }

    /// Physical period per axis.
    pub fn len(&self) -> f64 {
        self.data.len
    }

    /// Total number of lattice points (`n^dim`).
    pub fn total(&self) -> usize {
        self.data.n.pow(self.data.dim as u32)
    }

    /// Wavenumber spacing `2*pi/len`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.data.len
    }

    /// `len^dim`, the measure of the torus.
    pub fn volume(&self) -> f64 {
        real::powi(self.data.len, self.data.dim as i32)
    }

    /// Integer wavenumber of axis position `i`, in `(-n/2, n/2]`.
    pub fn kappa_of(&self, i: usize) -> i64 {
        let n = self.data.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Axis position of integer wavenumber `kappa` (must be representable).
    pub fn pos_of(&self, kappa: i64) -> usize {
        let n = self.data.n as i64;
        kappa.rem_euclid(n) as usize
    }

    /// Whether the integer wavenumber pair contains an unpaired Nyquist index.
    pub fn is_nyquist(&self, kappa: [i64; 2]) -> bool {
        let ny = (self.data.n / 2) as i64;
        kappa[0] == ny || (self.data.dim == 2 && kappa[1] == ny)
    }

    /// Flat coefficient index of an integer wavenumber pair.
    pub fn flat(&self, kappa: [i64; 2]) -> usize {
        let i0 = self.pos_of(kappa[0]);
        if self.data.dim == 1 {
            i0
        } else {
            self.pos_of(kappa[1]) * self.data.n + i0
        }
    }

    /// Flat index of `-kappa`, the Hermitian partner of flat index `idx`.
    pub fn conj_index(&self, idx: usize) -> usize {
        let n = self.data.n;
        if self.data.dim == 1 {
            (n - idx) % n
        } else {
            let i0 = idx % n;
            let i1 = idx / n;
            ((n - i1) % n) * n + (n - i0) % n
        }
    }

    /// Iterate over all lattice modes.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let n = self.data.n;
        let dk = self.dk();
        let total = self.total();
        (0..total).map(move |idx| {
            let i0 = idx % n;
            let i1 = idx / n;
            let kappa = [self.kappa_of(i0), if self.data.dim == 2 { self.kappa_of(i1) } else { 0 }];
            Mode {
                idx,
                kappa,
                k: [kappa[0] as f64 * dk, kappa[1] as f64 * dk],
            }
        })
    }

    /// Physical coordinates of flat point index `idx` (row-major, axis 0 fastest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let n = self.data.n;
        let dx = self.data.len / n as f64;
        let i0 = idx % n;
        let i1 = idx / n;
        [i0 as f64 * dx, if self.data.dim == 2 { i1 as f64 * dx } else { 0.0 }]
    }

    fn fft_1d(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.data.n;
        debug_assert_eq!(buf.len(), n);
        for (i, &j) in self.data.bitrev.iter().enumerate() {
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            let mut start = 0;
            while start < n {
                for m in 0..half {
                    let mut w = self.data.twiddles[m * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + m];
                    let b = buf[start + m + half] * w;
                    buf[start + m] = a + b;
                    buf[start + m + half] = a - b;
                }
                start += len;
            }
            len <<= 1;
        }
    }

    /// Physical values -> Fourier coefficients (normalized so a plane wave
    /// `exp(i*k*x)` has coefficient 1 at its mode).
    pub fn forward(&self, buf: &mut [Complex64]) {
        let n = self.data.n;
        if self.data.dim == 1 {
            self.fft_1d(buf, false);
        } else {
            for row in buf.chunks_exact_mut(n) {
                self.fft_1d(row, false);
            }
            let mut col = alloc::vec![Complex64::default(); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = buf[r * n + c];
                }
                self.fft_1d(&mut col, false);
                for r in 0..n {
                    buf[r * n + c] = col[r];
                }
            }
        }
        let scale = 1.0 / self.total() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Fourier coefficients -> physical values.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        let n = self.data.n;
        if self.data.dim == 1 {
            self.fft_1d(buf, true);
        } else {
            for row in buf.chunks_exact_mut(n) {
                self.fft_1d(row, true);
            }
            let mut col = alloc::vec![Complex64::default(); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = buf[r * n + c];
                }
                self.fft_1d(&mut col, true);
                for r in 0..n {
                    buf[r * n + c] = col[r];
                }
            }
        }
    }
}
