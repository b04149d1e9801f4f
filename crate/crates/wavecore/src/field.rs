//! Fourier-coefficient fields on a periodic grid, with the arithmetic the
//! rest of the crate is written in: spectral derivatives, exact (padded)
//! pointwise products, dealiasing and Sobolev norms.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::WaveError;
use crate::grid::Grid;
use crate::real;
use crate::Result;

/// A real- or complex-valued function stored by its Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    /// The zero field.
    pub fn zeros(grid: &Grid, real: bool) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.total()],
            real,
        }
    }

    /// The constant field `c` (real flag follows `c.im == 0`).
    pub fn constant(grid: &Grid, c: Complex64) -> SpectralField {
        let mut f = SpectralField::zeros(grid, c.im == 0.0);
        f.coeffs[0] = c;
        f
    }

    /// Wrap an externally built coefficient array.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>, real: bool) -> Result<SpectralField> {
        if coeffs.len() != grid.total() {
            return Err(WaveError::InvalidGrid(alloc::string::String::from(
                "coefficient array length does not match grid",
            )));
        }
        let mut f = SpectralField { grid: grid.clone(), coeffs, real };
        if real {
            f.hermitize();
        }
        Ok(f)
    }

    /// Transform physical samples (row-major, axis 0 fastest) to coefficients.
    pub fn from_values(grid: &Grid, values: &[Complex64], real: bool) -> Result<SpectralField> {
        if values.len() != grid.total() {
            return Err(WaveError::InvalidGrid(alloc::string::String::from(
                "value array length does not match grid",
            )));
        }
        let mut buf = values.to_vec();
        grid.forward(&mut buf);
        let mut f = SpectralField { grid: grid.clone(), coeffs: buf, real };
        if real {
            f.hermitize();
        }
        Ok(f)
    }

    /// Sample the field on the physical grid.
    pub fn to_values(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        self.grid.inverse(&mut buf);
        buf
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real_flag(&mut self, real: bool) {
        self.real = real;
    }

    /// Coefficient at integer wavenumber `kappa`.
    pub fn coeff(&self, kappa: [i64; 2]) -> Complex64 {
        self.coeffs[self.grid.flat(kappa)]
    }

    /// Set the coefficient at integer wavenumber `kappa`.
    pub fn set_coeff(&mut self, kappa: [i64; 2], c: Complex64) {
        let idx = self.grid.flat(kappa);
        self.coeffs[idx] = c;
    }

    /// Project onto the Hermitian-symmetric (real-valued) part.
    pub fn hermitize(&mut self) {
        let grid = self.grid.clone();
        for idx in 0..self.coeffs.len() {
            let j = grid.conj_index(idx);
            if j < idx {
                continue;
            }
            let a = self.coeffs[idx];
            let b = self.coeffs[j];
            let avg = 0.5 * (a + b.conj());
            self.coeffs[idx] = avg;
            self.coeffs[j] = avg.conj();
        }
        self.real = true;
    }

    /// The complex conjugate of the represented function.
    pub fn conj_field(&self) -> SpectralField {
        let mut out = SpectralField::zeros(&self.grid, self.real);
        for idx in 0..self.coeffs.len() {
            out.coeffs[self.grid.conj_index(idx)] = self.coeffs[idx].conj();
        }
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_grid(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += o;
        }
        out.real = self.real && other.real;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_grid(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c -= o;
        }
        out.real = self.real && other.real;
        Ok(out)
    }

    /// `self + s * other`, in place.
    pub fn add_scaled(&mut self, s: Complex64, other: &SpectralField) -> Result<()> {
        self.check_grid(other)?;
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += s * o;
        }
        self.real = self.real && other.real && s.im == 0.0;
        Ok(())
    }

    pub fn scale(&self, s: Complex64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out.real = self.real && s.im == 0.0;
        out
    }

    pub fn neg(&self) -> SpectralField {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Spectral derivative along `axis`; the unpaired Nyquist mode is zeroed.
    pub fn deriv(&self, axis: usize) -> SpectralField {
        let mut out = SpectralField::zeros(&self.grid, self.real);
        for m in self.grid.modes() {
            if self.grid.is_nyquist(m.kappa) {
                continue;
            }
            out.coeffs[m.idx] = Complex64::new(0.0, m.k[axis]) * self.coeffs[m.idx];
        }
        out
    }

    /// Gradient as one field per axis.
    pub fn grad(&self) -> Vec<SpectralField> {
        (0..self.grid.dim()).map(|a| self.deriv(a)).collect()
    }

    /// Spectral Laplacian (Nyquist zeroed, consistent with `deriv`).
    pub fn laplacian(&self) -> SpectralField {
        let mut out = SpectralField::zeros(&self.grid, self.real);
        for m in self.grid.modes() {
            if self.grid.is_nyquist(m.kappa) {
                continue;
            }
            out.coeffs[m.idx] = -m.k_sq() * self.coeffs[m.idx];
        }
        out
    }

    /// Zero every coefficient with some `|kappa_axis|` above `frac * n/2`.
    pub fn dealias(&self, frac: f64) -> SpectralField {
        let cutoff = frac * (self.grid.n() / 2) as f64;
        let mut out = self.clone();
        for m in self.grid.modes() {
            let hi = (m.kappa[0].unsigned_abs() as f64) > cutoff
                || (m.kappa[1].unsigned_abs() as f64) > cutoff;
            if hi {
                out.coeffs[m.idx] = Complex64::default();
            }
        }
        out
    }

    /// Exact pointwise product: both factors are zero-padded to a grid of
    /// twice the resolution, multiplied in physical space and truncated back,
    /// so no aliasing enters the retained band.
    pub fn mul_exact(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_grid(other)?;
        let fine = Grid::new(self.grid.dim(), 2 * self.grid.n(), self.grid.len())?;
        let mut a = embed(self, &fine);
        let mut b = embed(other, &fine);
        fine.inverse(&mut a);
        fine.inverse(&mut b);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= y;
        }
        fine.forward(&mut a);
        let mut out = SpectralField::zeros(&self.grid, self.real && other.real);
        let ny = (self.grid.n() / 2) as i64;
        for m in self.grid.modes() {
            let mut c = a[fine.flat(m.kappa)];
            if m.kappa[0] == ny || (self.grid.dim() == 2 && m.kappa[1] == ny) {
                c += a[fine.flat([
                    if m.kappa[0] == ny { -ny } else { m.kappa[0] },
                    if self.grid.dim() == 2 && m.kappa[1] == ny { -ny } else { m.kappa[1] },
                ])];
            }
            out.coeffs[m.idx] = c;
        }
        Ok(out)
    }

    /// Periodic Sobolev norm `(sum (1+|k|^2)^s |c(k)|^2 * len^d)^(1/2)`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let vol = self.grid.volume();
        let mut acc = 0.0;
        for m in self.grid.modes() {
            let w = real::powf(1.0 + m.k_sq(), s);
            acc += w * self.coeffs[m.idx].norm_sqr();
        }
        real::sqrt(acc * vol)
    }

    /// L2 norm (Sobolev norm with `s = 0`).
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// L2 inner product `integral(self * conj(other))`.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64> {
        self.check_grid(other)?;
        let vol = self.grid.volume();
        let mut acc = Complex64::default();
        for (a, b) in self.coeffs.iter().zip(other.coeffs.iter()) {
            acc += a * b.conj();
        }
        Ok(acc * vol)
    }

    /// Max pointwise magnitude on the physical grid.
    pub fn linf_norm(&self) -> f64 {
        self.to_values()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Whether all coefficients are finite.
    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(WaveError::GridMismatch)
        }
    }
}

/// Copy the coefficients of `f` into the matching wavenumbers of the finer
/// grid, splitting unpaired Nyquist content evenly between `+n/2` and `-n/2`.
fn embed(f: &SpectralField, fine: &Grid) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); fine.total()];
    let ny = (f.grid.n() / 2) as i64;
    let dim = f.grid.dim();
    for m in f.grid.modes() {
        let c = f.coeffs[m.idx];
        let split0 = m.kappa[0] == ny;
        let split1 = dim == 2 && m.kappa[1] == ny;
        let weight = 1.0 / (if split0 { 2.0 } else { 1.0 }) / (if split1 { 2.0 } else { 1.0 });
        let opts0: &[i64] = if split0 { &[ny, -ny] } else { core::slice::from_ref(&m.kappa[0]) };
        let opts1: &[i64] = if split1 { &[ny, -ny] } else { core::slice::from_ref(&m.kappa[1]) };
        for &k0 in opts0 {
            for &k1 in opts1 {
                out[fine.flat([k0, k1])] += weight * c;
            }
        }
    }
    out
}

/// Dot product of two gradient-like field vectors.
pub fn dot(a: &[SpectralField], b: &[SpectralField]) -> Result<SpectralField> {
    let mut acc = a[0].mul_exact(&b[0])?;
    for (x, y) in a.iter().zip(b.iter()).skip(1) {
        acc = acc.add(&x.mul_exact(y)?)?;
    }
    Ok(acc)
}
