//! Flat binary serialization of spectral fields.
//!
//! Layout: a fixed header — dimension (`u32`), points per axis (`u32`),
//! physical period (`f64`), reality flag (`u8`) — followed by the Fourier
//! coefficients in storage order as interleaved real/imaginary `f64` pairs.
//! All scalars are little-endian.

use std::io::{Read, Write};
use std::path::Path;

use wavecore::{Grid, SpectralField};

use crate::HarnessError;

/// Serialize one field into a writer.
pub fn write_field<W: Write>(w: &mut W, f: &SpectralField) -> Result<(), HarnessError> {
    let grid = f.grid();
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&grid.len().to_le_bytes())?;
    w.write_all(&[u8::from(f.is_real())])?;
    for c in f.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// Deserialize one field from a reader.
pub fn read_field<R: Read>(r: &mut R) -> Result<SpectralField, HarnessError> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let len = f64::from_le_bytes(b8);
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let grid = Grid::new(dim, n, len)?;
    let mut coeffs = Vec::with_capacity(grid.total());
    for _ in 0..grid.total() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        coeffs.push(num_complex::Complex64::new(re, im));
    }
    Ok(SpectralField::from_coeffs(&grid, coeffs, flag[0] != 0)?)
}

/// Header for [`field_rows`].
pub const FIELD_HEADER: [&str; 4] = ["k_x", "k_y", "re", "im"];

/// CSV rows for a field: one row per mode, integer wavenumber columns
/// followed by the real and imaginary parts of the coefficient.
pub fn field_rows(f: &SpectralField) -> Vec<Vec<crate::csvout::Cell>> {
    use crate::csvout::Cell;
    f.grid()
        .modes()
        .map(|m| {
            let c = f.coeffs()[m.idx];
            vec![
                Cell::Int(m.kappa[0]),
                Cell::Int(m.kappa[1]),
                Cell::Num(c.re),
                Cell::Num(c.im),
            ]
        })
        .collect()
}

/// Write a field to a file, creating parent directories.
pub fn save_field(path: &Path, f: &SpectralField) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = std::fs::File::create(path)?;
    write_field(&mut file, f)
}

/// Read a field from a file.
pub fn load_field(path: &Path) -> Result<SpectralField, HarnessError> {
    let mut file = std::fs::File::open(path)?;
    read_field(&mut file)
}
