use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// How the periodic box is realized.
///
/// `TwoPointFiveD` fields carry three components but depend only on `(x, y)`,
/// so the curl keeps its full three-dimensional form while the lattice is
/// two-dimensional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DimMode {
    TwoPointFiveD,
    ThreeD,
}

impl DimMode {
    /// Number of independent coordinates (2 or 3).
    pub fn spatial_dims(self) -> usize {
        match self {
            DimMode::TwoPointFiveD => 2,
            DimMode::ThreeD => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            DimMode::TwoPointFiveD => 2,
            DimMode::ThreeD => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            2 => Some(DimMode::TwoPointFiveD),
            3 => Some(DimMode::ThreeD),
            _ => None,
        }
    }
}

impl fmt::Display for DimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimMode::TwoPointFiveD => f.write_str("2.5d"),
            DimMode::ThreeD => f.write_str("3d"),
        }
    }
}

struct GridTables {
    dim: DimMode,
    n: usize,
    len: usize,
    lattice: Vec<[i32; 3]>,
    deriv: Vec<[f64; 3]>,
    norm2: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// A `2π`-periodic box with `N` points per axis and its wavenumber lattice.
///
/// Storage order is row-major over the axes `(x, y[, z])`, `z` fastest. Along
/// each axis, storage index `i` carries wavenumber `i` for `i <= N/2` and
/// `i - N` otherwise, so the lattice is `{-N/2+1, ..., N/2}` per axis.
///
/// Transform convention: spectral coefficients are Fourier-series
/// coefficients, `f(x) = Σ_k f̂(k) e^{ik·x}`, so the forward transform divides
/// by the number of grid points. With this convention
/// `∫ |f|² dx = (2π)^d Σ_k |f̂(k)|²`.
///
/// Cloning is cheap; the wavenumber tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridTables>,
}

impl Grid {
    pub fn new(dim: DimMode, points_per_axis: usize) -> Result<Self> {
        let n = points_per_axis;
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        let d = dim.spatial_dims();
        let len = n.pow(d as u32);
        let mut lattice = Vec::with_capacity(len);
        for idx in 0..len {
            let mut k = [0i32; 3];
            let mut rem = idx;
            for axis in (0..d).rev() {
                k[axis] = axis_wavenumber(rem % n, n);
                rem /= n;
            }
            lattice.push(k);
        }
        let nyquist = (n / 2) as i32;
        let deriv = lattice
            .iter()
            .map(|k| k.map(|c| if c == nyquist { 0.0 } else { c as f64 }))
            .collect();
        let norm2 = lattice
            .iter()
            .map(|k| k.iter().map(|&c| (c as i64) * (c as i64)).sum())
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridTables {
                dim,
                n,
                len,
                lattice,
                deriv,
                norm2,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim_mode(&self) -> DimMode {
        self.inner.dim
    }

    pub fn spatial_dims(&self) -> usize {
        self.inner.dim.spatial_dims()
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.n
    }

    /// Number of grid points, equal to the number of lattice coefficients.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len == 0
    }

    pub fn box_length(&self) -> f64 {
        2.0 * PI
    }

    /// Grid spacing `h = 2π/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.inner.n as f64
    }

    /// Measure of the torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.spatial_dims() as i32)
    }

    /// Largest `|k_i|` kept by the two-thirds dealiasing rule.
    pub fn dealias_limit(&self) -> i32 {
        (self.inner.n / 3) as i32
    }

    /// Integer lattice wavevector at a storage index (`k_z = 0` in 2.5D).
    pub fn wavevector(&self, idx: usize) -> [i32; 3] {
        self.inner.lattice[idx]
    }

    /// Wavevector used for differentiation: the lattice wavevector with the
    /// unpaired Nyquist component set to zero, so odd derivatives of real
    /// fields stay real.
    pub fn derivative_wavevector(&self, idx: usize) -> [f64; 3] {
        self.inner.deriv[idx]
    }

    /// `|k|²` as an exact integer.
    pub fn norm2(&self, idx: usize) -> i64 {
        self.inner.norm2[idx]
    }

    pub fn magnitude(&self, idx: usize) -> f64 {
        (self.inner.norm2[idx] as f64).sqrt()
    }

    pub(crate) fn derivative_table(&self) -> &[[f64; 3]] {
        &self.inner.deriv
    }

    pub(crate) fn norm2_table(&self) -> &[i64] {
        &self.inner.norm2
    }

    /// Storage index of a lattice wavevector, if it lies on this lattice.
    pub fn index_of(&self, k: [i32; 3]) -> Option<usize> {
        let n = self.inner.n as i32;
        let d = self.spatial_dims();
        if d == 2 && k[2] != 0 {
            return None;
        }
        let mut idx = 0usize;
        for &c in &k[..d] {
            if c <= -n / 2 || c > n / 2 {
                return None;
            }
            idx = idx * self.inner.n + c.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Storage index holding the alias of `-k`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let n = self.inner.n;
        let d = self.spatial_dims();
        let mut out = 0usize;
        let mut stride = n.pow(d as u32);
        for _ in 0..d {
            stride /= n;
            let i = (idx / stride) % n;
            out += ((n - i) % n) * stride;
        }
        out
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.inner.n;
        let h = self.spacing();
        let d = self.spatial_dims();
        let mut x = [0.0; 3];
        let mut rem = idx;
        for axis in (0..d).rev() {
            x[axis] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }

    /// In-place forward transform, normalized by the number of points.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inner.forward);
        let scale = 1.0 / self.inner.len as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    /// In-place inverse transform (unnormalized synthesis).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inner.inverse);
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(buf.len(), self.inner.len, "transform buffer length");
        let n = self.inner.n;
        let d = self.spatial_dims();
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // fastest axis: contiguous rows
        plan.process_with_scratch(buf, &mut scratch);
        let mut line = vec![Complex64::default(); n];
        let mut stride = 1usize;
        for _ in 1..d {
            stride *= n;
            let block = stride * n;
            for start in (0..buf.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = buf[base + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        buf[base + i * stride] = *v;
                    }
                }
            }
        }
    }
}

fn axis_wavenumber(i: usize, n: usize) -> i32 {
    if i <= n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim && self.inner.n == other.inner.n)
    }
}

impl Eq for Grid {}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .finish()
    }
}
