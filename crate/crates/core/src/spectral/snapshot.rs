//! The `HMHD1` snapshot format.
//!
//! Layout, all multi-byte values little-endian:
//!
//! ```text
//! b"HMHD"            magic
//! u8                 version (1)
//! u8                 dimension mode (2 = 2.5D, 3 = 3D)
//! u32                N, points per axis
//! f64                alpha
//! f64                t
//! [f64; 2] * L * 3   u: components x, y, z; each L complex coefficients
//! [f64; 2] * L * 3   B: same layout
//! ```
//!
//! `L = N^d`. Within a component, coefficients are written in wavenumber
//! row-major order: `k_x` slowest, each axis ascending from `-N/2+1` to
//! `N/2`. Each complex value is its real part followed by its imaginary part.

use std::fs;
use std::path::Path;

use rustfft::num_complex::Complex64;

use super::{DimMode, Grid, SpectralVectorField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HMHD";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 1 + 4 + 8 + 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub alpha: f64,
    pub t: f64,
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
}

/// Storage indices in wavenumber row-major order.
fn wavenumber_order(grid: &Grid) -> Vec<usize> {
    let n = grid.points_per_axis() as i32;
    let d = grid.spatial_dims();
    let axis: Vec<i32> = (-n / 2 + 1..=n / 2).collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut k = [0i32; 3];
    let total = grid.len();
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..d).rev() {
            k[a] = axis[rem % n as usize];
            rem /= n as usize;
        }
        out.push(grid.index_of(k).expect("lattice wavevector"));
    }
    out
}

impl Snapshot {
    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        self.u.check_grid(&self.b)?;
        let grid = self.grid();
        let order = wavenumber_order(grid);
        let mut out = Vec::with_capacity(HEADER_LEN + 2 * 3 * 16 * grid.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(grid.dim_mode().code());
        out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for field in [&self.u, &self.b] {
            for comp in field.components() {
                for &idx in &order {
                    out.extend_from_slice(&comp[idx].re.to_le_bytes());
                    out.extend_from_slice(&comp[idx].im.to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::format("HMHD1 snapshot", m);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("missing HMHD magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let dim = DimMode::from_code(bytes[5]).ok_or_else(|| bad(format!("unknown dimension mode {}", bytes[5])))?;
        let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let alpha = f64::from_le_bytes(bytes[10..18].try_into().unwrap());
        let t = f64::from_le_bytes(bytes[18..26].try_into().unwrap());
        let grid = Grid::new(dim, n).map_err(|e| bad(e.to_string()))?;
        let expected = HEADER_LEN + 2 * 3 * 16 * grid.len();
        if bytes.len() != expected {
            return Err(bad(format!("expected {expected} bytes for N = {n}, found {}", bytes.len())));
        }
        let order = wavenumber_order(&grid);
        let mut pos = HEADER_LEN;
        let mut read = || {
            let v = f64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
            pos += 8;
            v
        };
        let mut fields = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut comps = [
                vec![Complex64::default(); grid.len()],
                vec![Complex64::default(); grid.len()],
                vec![Complex64::default(); grid.len()],
            ];
            for comp in comps.iter_mut() {
                for &idx in &order {
                    let re = read();
                    let im = read();
                    comp[idx] = Complex64::new(re, im);
                }
            }
            let mut f = SpectralVectorField::from_coefficients(&grid, comps)?;
            let solenoidal = f.divergence_residual() <= super::DIVERGENCE_TOLERANCE;
            f.set_divergence_free(solenoidal);
            fields.push(f);
        }
        let b = fields.pop().unwrap();
        let u = fields.pop().unwrap();
        Ok(Snapshot { alpha, t, u, b })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(DimMode::TwoPointFiveD, 8).unwrap();
        let snap = Snapshot {
            alpha: 0.75,
            t: 1.5,
            u: SpectralVectorField::zeros(&g),
            b: SpectralVectorField::single_mode(&g, [-3, 0, 0], 1, 2.0, 0.0).unwrap(),
        };
        let bytes = snap.encode().unwrap();
        assert_eq!(&bytes[..4], b"HMHD");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 2);
        assert_eq!(&bytes[6..10], &8u32.to_le_bytes());
        assert_eq!(&bytes[10..18], &0.75f64.to_le_bytes());
        assert_eq!(&bytes[18..26], &1.5f64.to_le_bytes());
        assert_eq!(bytes.len(), 26 + 2 * 3 * 64 * 16);
        // k = (-3, 0) is the first x-row, column k_y = 0 (fourth entry), of B's y component
        let offset = 26 + 3 * 64 * 16 + 64 * 16 + 3 * 16;
        assert_eq!(&bytes[offset..offset + 8], &1.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::new(DimMode::ThreeD, 8).unwrap();
        let snap = Snapshot {
            alpha: 1.0,
            t: 0.0,
            u: SpectralVectorField::zeros(&g),
            b: SpectralVectorField::zeros(&g),
        };
        let bytes = snap.encode().unwrap();
        assert!(Snapshot::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(Snapshot::decode(&wrong).is_err());
        let mut wrong = bytes;
        wrong[4] = 9;
        assert!(matches!(Snapshot::decode(&wrong), Err(Error::Format { .. })));
    }
}
