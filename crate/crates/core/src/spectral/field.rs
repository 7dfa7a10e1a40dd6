use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// Tolerance behind the divergence-free flag: `max |k·f̂| <= TOL · max |f̂|`.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-12;

/// Real samples of a three-component field on the grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalVectorField {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

impl PhysicalVectorField {
    pub fn new(grid: &Grid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for (i, c) in comps.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::Shape(format!(
                    "component {i} has {} samples, grid has {} points",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(PhysicalVectorField {
            grid: grid.clone(),
            comps,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![0.0; grid.len()];
        PhysicalVectorField {
            grid: grid.clone(),
            comps: [z.clone(), z.clone(), z],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut comps = [
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        ];
        for idx in 0..grid.len() {
            let v = f(grid.point(idx));
            for a in 0..3 {
                comps[a].push(v[a]);
            }
        }
        PhysicalVectorField {
            grid: grid.clone(),
            comps,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.comps
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                (self.comps[0][i].powi(2) + self.comps[1][i].powi(2) + self.comps[2][i].powi(2))
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest pointwise difference over all components.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }
}

/// A real vector field stored as Fourier coefficients on the grid lattice.
///
/// Fields are immutable: every operation returns a new field. The
/// `divergence_free` flag is an assertion set only by constructors that
/// guarantee `k·f̂(k) = 0` (projection, curl) or after an explicit check.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    comps: [Vec<Complex64>; 3],
    divergence_free: bool,
}

impl SpectralVectorField {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        SpectralVectorField {
            grid: grid.clone(),
            comps: [z.clone(), z.clone(), z],
            divergence_free: true,
        }
    }

    pub fn from_coefficients(grid: &Grid, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for (i, c) in comps.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::Shape(format!(
                    "component {i} has {} coefficients, grid has {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(SpectralVectorField {
            grid: grid.clone(),
            comps,
            divergence_free: false,
        })
    }

    pub(crate) fn from_parts(grid: &Grid, comps: [Vec<Complex64>; 3], divergence_free: bool) -> Self {
        debug_assert!(comps.iter().all(|c| c.len() == grid.len()));
        SpectralVectorField {
            grid: grid.clone(),
            comps,
            divergence_free,
        }
    }

    /// Field with a single real Fourier pair: `amplitude · e_axis · cos(k·x + phase)`.
    pub fn single_mode(grid: &Grid, k: [i32; 3], axis: usize, amplitude: f64, phase: f64) -> Result<Self> {
        let idx = grid
            .index_of(k)
            .ok_or_else(|| Error::Parameter(format!("wavevector {k:?} is not on the lattice")))?;
        let mirror = grid.mirror_index(idx);
        let mut comps = Self::zeros(grid).comps;
        let c = Complex64::from_polar(0.5 * amplitude, phase);
        if mirror == idx {
            comps[axis][idx] = Complex64::new(amplitude * phase.cos(), 0.0);
        } else {
            comps[axis][idx] = c;
            comps[axis][mirror] = c.conj();
        }
        Ok(Self::from_parts(grid, comps, false))
    }

    /// Forward transform of real samples.
    pub fn to_spectral(samples: &PhysicalVectorField) -> Self {
        let grid = samples.grid();
        let comps = samples.comps.each_ref().map(|c| {
            let mut buf: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            grid.forward(&mut buf);
            buf
        });
        Self::from_parts(grid, comps, false)
    }

    /// Inverse transform; the imaginary round-off of the synthesis is dropped.
    pub fn to_physical(&self) -> PhysicalVectorField {
        let comps = self.comps.each_ref().map(|c| synthesize(&self.grid, c));
        PhysicalVectorField {
            grid: self.grid.clone(),
            comps,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[Complex64] {
        &self.comps[axis]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    pub fn coefficient(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    /// `max_k |k·f̂(k)| / max_k |f̂(k)|`, zero for the zero field.
    pub fn divergence_residual(&self) -> f64 {
        let kt = self.grid.derivative_table();
        let mut div = 0.0f64;
        let mut amp = 0.0f64;
        for (idx, k) in kt.iter().enumerate() {
            let c = self.coefficient(idx);
            let d = c[0] * k[0] + c[1] * k[1] + c[2] * k[2];
            div = div.max(d.norm());
            amp = amp.max(c[0].norm()).max(c[1].norm()).max(c[2].norm());
        }
        if amp == 0.0 {
            0.0
        } else {
            div / amp
        }
    }

    pub(crate) fn set_divergence_free(&mut self, flag: bool) {
        self.divergence_free = flag;
    }

    /// Checks the divergence residual and sets the flag.
    pub fn assert_divergence_free(mut self) -> Result<Self> {
        let r = self.divergence_residual();
        if r > DIVERGENCE_TOLERANCE {
            return Err(Error::Precondition(format!(
                "field is not divergence free (relative residual {r:e})"
            )));
        }
        self.divergence_free = true;
        Ok(self)
    }

    /// Applies a per-mode map; `keeps_solenoidal` states whether the map
    /// preserves `k·f̂ = 0`.
    pub(crate) fn map_modes(
        &self,
        keeps_solenoidal: bool,
        mut f: impl FnMut(usize, [Complex64; 3]) -> [Complex64; 3],
    ) -> Self {
        let len = self.grid.len();
        let mut out = [
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        ];
        for idx in 0..len {
            let v = f(idx, self.coefficient(idx));
            for a in 0..3 {
                out[a].push(v[a]);
            }
        }
        Self::from_parts(&self.grid, out, keeps_solenoidal && self.divergence_free)
    }

    /// Multiplies every coefficient by a real per-mode weight.
    pub fn multiply(&self, weight: impl Fn(usize) -> f64) -> Self {
        self.map_modes(true, |idx, c| {
            let w = weight(idx);
            c.map(|x| x * w)
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.multiply(|_| s)
    }

    /// `Σ_k w(k) |f̂(k)|²` summed over components.
    pub fn weighted_energy(&self, weight: impl Fn(usize) -> f64) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                let w = weight(idx);
                if w == 0.0 {
                    return 0.0;
                }
                w * self.comps.iter().map(|c| c[idx].norm_sqr()).sum::<f64>()
            })
            .sum()
    }

    /// `∫ |f|² dx` over the torus.
    pub fn l2_norm_squared(&self) -> f64 {
        self.grid.volume() * self.weighted_energy(|_| 1.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// `∫ f·g dx`.
    pub fn inner(&self, other: &Self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum::<f64>())
            .sum();
        self.grid.volume() * s
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter().map(|x| x.norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// `max_k |f̂(-k) - conj(f̂(k))|`, which vanishes for real fields.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.grid.len() {
            let m = self.grid.mirror_index(idx);
            for c in &self.comps {
                worst = worst.max((c[m] - c[idx].conj()).norm());
            }
        }
        worst
    }

    /// True when every coefficient outside `keep` is exactly zero.
    pub fn is_supported_in(&self, keep: impl Fn(usize) -> bool) -> bool {
        (0..self.grid.len())
            .filter(|&idx| !keep(idx))
            .all(|idx| self.comps.iter().all(|c| c[idx] == Complex64::default()))
    }

    /// Copies the field onto another lattice of the same dimension mode.
    ///
    /// Modes with `|k_i| >= min(N, N')/2` on any axis are dropped, so
    /// refinement is exact for fields without Nyquist content.
    pub fn resample(&self, target: &Grid) -> Result<Self> {
        if target.dim_mode() != self.grid.dim_mode() {
            return Err(Error::Shape(format!(
                "cannot resample {} field onto {} grid",
                self.grid.dim_mode(),
                target.dim_mode()
            )));
        }
        let limit = (self.grid.points_per_axis().min(target.points_per_axis()) / 2) as i32;
        let mut out = Self::zeros(target).comps;
        for idx in 0..self.grid.len() {
            let k = self.grid.wavevector(idx);
            if k.iter().any(|c| c.abs() >= limit) {
                continue;
            }
            let tgt = target.index_of(k).expect("mode inside both lattices");
            for a in 0..3 {
                out[a][tgt] = self.comps[a][idx];
            }
        }
        Ok(Self::from_parts(target, out, self.divergence_free))
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

impl Add for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn add(self, rhs: Self) -> SpectralVectorField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in addition");
        let comps = [0, 1, 2].map(|a| {
            self.comps[a]
                .iter()
                .zip(&rhs.comps[a])
                .map(|(x, y)| x + y)
                .collect()
        });
        SpectralVectorField::from_parts(&self.grid, comps, self.divergence_free && rhs.divergence_free)
    }
}

impl Sub for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn sub(self, rhs: Self) -> SpectralVectorField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in subtraction");
        let comps = [0, 1, 2].map(|a| {
            self.comps[a]
                .iter()
                .zip(&rhs.comps[a])
                .map(|(x, y)| x - y)
                .collect()
        });
        SpectralVectorField::from_parts(&self.grid, comps, self.divergence_free && rhs.divergence_free)
    }
}

impl Mul<f64> for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn mul(self, rhs: f64) -> SpectralVectorField {
        self.scale(rhs)
    }
}

impl Neg for &SpectralVectorField {
    type Output = SpectralVectorField;
    fn neg(self) -> SpectralVectorField {
        self.scale(-1.0)
    }
}

/// A real scalar field stored as Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralScalarField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coefficients(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralScalarField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn to_spectral(grid: &Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.forward(&mut buf);
        Ok(SpectralScalarField {
            grid: grid.clone(),
            coeffs: buf,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::to_spectral(grid, &samples).expect("sample count matches grid")
    }

    pub fn to_physical(&self) -> Vec<f64> {
        synthesize(&self.grid, &self.coeffs)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn multiply(&self, weight: impl Fn(usize) -> f64) -> Self {
        SpectralScalarField {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * weight(i))
                .collect(),
        }
    }

    /// `∇f` as a vector field.
    pub fn gradient(&self) -> SpectralVectorField {
        let kt = self.grid.derivative_table();
        let comps = [0, 1, 2].map(|a| {
            self.coeffs
                .iter()
                .zip(kt)
                .map(|(c, k)| c * Complex64::new(0.0, k[a]))
                .collect()
        });
        SpectralVectorField::from_parts(&self.grid, comps, false)
    }

    pub fn l2_norm_squared(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

impl Add for &SpectralScalarField {
    type Output = SpectralScalarField;
    fn add(self, rhs: Self) -> SpectralScalarField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in addition");
        SpectralScalarField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(x, y)| x + y).collect(),
        }
    }
}

impl Sub for &SpectralScalarField {
    type Output = SpectralScalarField;
    fn sub(self, rhs: Self) -> SpectralScalarField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in subtraction");
        SpectralScalarField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(x, y)| x - y).collect(),
        }
    }
}

pub(crate) fn synthesize(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    grid.inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}
