//! Initial-data presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{leray_project, Grid, PhysicalVectorField, SpectralVectorField};

/// A named initial condition, generated on any grid.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Zero,
    /// See [`orszag_tang`].
    OrszagTang { amplitude: f64 },
    /// Independent [`random_solenoidal`] draws, `u` from `seed` and `B`
    /// from `seed + 1`.
    Random {
        amplitude: f64,
        seed: u64,
        slope: f64,
        band: f64,
    },
    /// `u = 0` and the decaying mode of [`single_mode_decay`].
    SingleMode { amplitude: f64, k: [i32; 3] },
}

impl InitialData {
    pub fn generate(&self, grid: &Grid) -> Result<(SpectralVectorField, SpectralVectorField)> {
        match *self {
            InitialData::Zero => Ok((SpectralVectorField::zeros(grid), SpectralVectorField::zeros(grid))),
            InitialData::OrszagTang { amplitude } => Ok(orszag_tang(grid, amplitude)),
            InitialData::Random {
                amplitude,
                seed,
                slope,
                band,
            } => Ok((
                random_solenoidal(grid, amplitude, slope, band, seed)?,
                random_solenoidal(grid, amplitude, slope, band, seed.wrapping_add(1))?,
            )),
            InitialData::SingleMode { amplitude, k } => {
                Ok((SpectralVectorField::zeros(grid), single_mode_decay(grid, amplitude, k)?))
            }
        }
    }
}

/// `u = A(−sin y, sin x, 0)`, `B = A(−sin y, sin 2x, 0)`.
pub fn orszag_tang(grid: &Grid, amplitude: f64) -> (SpectralVectorField, SpectralVectorField) {
    let a = amplitude;
    let u = PhysicalVectorField::from_fn(grid, |x| [-a * x[1].sin(), a * x[0].sin(), 0.0]);
    let b = PhysicalVectorField::from_fn(grid, |x| [-a * x[1].sin(), a * (2.0 * x[0]).sin(), 0.0]);
    (
        leray_project(&SpectralVectorField::to_spectral(&u)),
        leray_project(&SpectralVectorField::to_spectral(&b)),
    )
}

/// `B = A e sin(k·x)` with a unit `e ⟂ k`: `ẑ` when `k_z = 0`. Advection,
/// stretching and the Hall term all vanish on it, so it decays at rate
/// `|k|^{2α}`.
pub fn single_mode_decay(grid: &Grid, amplitude: f64, k: [i32; 3]) -> Result<SpectralVectorField> {
    if k == [0, 0, 0] {
        return Err(Error::Parameter("single-mode wavevector must be nonzero".into()));
    }
    if grid.index_of(k).is_none() {
        return Err(Error::Parameter(format!("wavevector {k:?} is not on the grid")));
    }
    let kf = k.map(f64::from);
    let e = if k[2] == 0 {
        [0.0, 0.0, 1.0]
    } else {
        let other = if k[1] == 0 && k[2] == 0 { [0.0, 1.0, 0.0] } else { [1.0, 0.0, 0.0] };
        let c = [
            kf[1] * other[2] - kf[2] * other[1],
            kf[2] * other[0] - kf[0] * other[2],
            kf[0] * other[1] - kf[1] * other[0],
        ];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        c.map(|x| x / n)
    };
    let f = PhysicalVectorField::from_fn(grid, |x| {
        let s = amplitude * (kf[0] * x[0] + kf[1] * x[1] + kf[2] * x[2]).sin();
        e.map(|ei| ei * s)
    });
    Ok(leray_project(&SpectralVectorField::to_spectral(&f)))
}

/// Solenoidal field with coefficients `|k|^{-slope}` times uniform complex
/// draws on `0 < |k| <= band`, rescaled to root-mean-square `amplitude`.
/// Deterministic for a given seed.
pub fn random_solenoidal(grid: &Grid, amplitude: f64, slope: f64, band: f64, seed: u64) -> Result<SpectralVectorField> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Parameter(format!("amplitude must be non-negative, got {amplitude}")));
    }
    if !slope.is_finite() {
        return Err(Error::Parameter("spectrum slope must be finite".into()));
    }
    if !(band >= 1.0 && band.is_finite()) {
        return Err(Error::Parameter(format!("band must be at least 1, got {band}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = grid.len();
    let mut comps: [Vec<Complex64>; 3] = Default::default();
    for c in comps.iter_mut() {
        *c = vec![Complex64::default(); len];
    }
    let band2 = band * band;
    for idx in 0..len {
        let k2 = grid.norm2(idx);
        if k2 == 0 || k2 as f64 > band2 {
            continue;
        }
        let mirror = grid.mirror_index(idx);
        if mirror <= idx {
            continue;
        }
        let w = (k2 as f64).powf(-slope / 2.0);
        for c in comps.iter_mut() {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * w;
            c[idx] = z;
            c[mirror] = z.conj();
        }
    }
    let f = leray_project(&SpectralVectorField::from_coefficients(grid, comps)?);
    let rms = (f.l2_norm_squared() / grid.volume()).sqrt();
    if rms == 0.0 {
        return Ok(f);
    }
    Ok(f.scale(amplitude / rms))
}
