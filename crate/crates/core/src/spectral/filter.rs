use std::fmt;

use rustfft::num_complex::Complex64;

use super::{Grid, SpectralScalarField, SpectralVectorField};
use crate::error::{Error, Result};

/// Sharp Fourier-space cutoffs. Each variant keeps an index set of the
/// lattice and zeroes every other coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrequencyFilter {
    /// `{k : |k| <= radius}`, the Friedrichs truncation.
    FriedrichsBall { radius: f64 },
    /// `{k : |k_i| <= N/3 for every axis}`.
    DealiasTwoThirds,
    /// `{k : 2^l <= |k| < 2^(l+1)}` for `l >= 0`, `{k = 0}` for `l = -1`.
    DyadicShell(i32),
}

impl FrequencyFilter {
    pub fn ball(radius: f64) -> Self {
        FrequencyFilter::FriedrichsBall { radius }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FrequencyFilter::FriedrichsBall { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::Parameter(format!("Friedrichs radius must be positive, got {radius}")))
            }
            FrequencyFilter::DyadicShell(l) if l < -1 => {
                Err(Error::Parameter(format!("dyadic shell index must be >= -1, got {l}")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the mode at a storage index survives the filter.
    pub fn keeps(&self, grid: &Grid, idx: usize) -> bool {
        match *self {
            FrequencyFilter::FriedrichsBall { radius } => (grid.norm2(idx) as f64) <= radius * radius,
            FrequencyFilter::DealiasTwoThirds => {
                let m = grid.dealias_limit();
                grid.wavevector(idx).iter().all(|c| c.abs() <= m)
            }
            FrequencyFilter::DyadicShell(l) => dyadic_shell(grid.norm2(idx)) == l,
        }
    }

    /// The kept index set, described in words.
    pub fn description(&self) -> String {
        match *self {
            FrequencyFilter::FriedrichsBall { radius } => format!("{{k : |k| <= {radius}}}"),
            FrequencyFilter::DealiasTwoThirds => "{k : |k_i| <= N/3 for all i}".to_string(),
            FrequencyFilter::DyadicShell(-1) => "{k : |k| < 1}".to_string(),
            FrequencyFilter::DyadicShell(l) => format!("{{k : 2^{l} <= |k| < 2^{}}}", l + 1),
        }
    }

    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.len()).map(|i| self.keeps(grid, i)).collect()
    }

    pub fn apply(&self, f: &SpectralVectorField) -> Result<SpectralVectorField> {
        self.validate()?;
        let grid = f.grid().clone();
        let zero = Complex64::default();
        Ok(f.map_modes(true, |idx, c| if self.keeps(&grid, idx) { c } else { [zero; 3] }))
    }

    pub fn apply_scalar(&self, f: &SpectralScalarField) -> Result<SpectralScalarField> {
        self.validate()?;
        let grid = f.grid();
        let coeffs = f
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, &c)| if self.keeps(grid, i) { c } else { Complex64::default() })
            .collect();
        SpectralScalarField::from_coefficients(grid, coeffs)
    }
}

impl fmt::Display for FrequencyFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description())
    }
}

/// Dyadic shell of a lattice point from its exact `|k|²`: the `l` with
/// `4^l <= |k|² < 4^(l+1)`, or `-1` at the origin.
pub fn dyadic_shell(norm2: i64) -> i32 {
    if norm2 <= 0 {
        -1
    } else {
        ((63 - norm2.leading_zeros()) / 2) as i32
    }
}

/// Index of the highest shell that can hold lattice points,
/// `ceil(log2(N√3/2))`.
pub fn max_shell(grid: &Grid) -> i32 {
    let n = grid.points_per_axis() as f64;
    (n * 3f64.sqrt() / 2.0).log2().ceil() as i32
}

pub fn apply_filter(f: &SpectralVectorField, filter: FrequencyFilter) -> Result<SpectralVectorField> {
    filter.apply(f)
}

/// `(-Δ)^α`: multiplies each coefficient by `|k|^{2α}`.
pub fn fractional_laplacian(f: &SpectralVectorField, alpha: f64) -> Result<SpectralVectorField> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(lambda_power(f, 2.0 * alpha))
}

/// `Λ^s = (-Δ)^{s/2}` with the zero mode mapped to zero.
pub fn lambda_power(f: &SpectralVectorField, s: f64) -> SpectralVectorField {
    let grid = f.grid().clone();
    f.multiply(|idx| lambda_symbol(grid.norm2(idx), s))
}

/// `|k|^s` for `k != 0`, zero at the origin.
pub fn lambda_symbol(norm2: i64, s: f64) -> f64 {
    if norm2 == 0 {
        0.0
    } else {
        (norm2 as f64).powf(0.5 * s)
    }
}

/// Orthogonal projection onto divergence-free fields,
/// `f̂ ↦ f̂ - k (k·f̂)/|k|²`.
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    let kt = f.grid().derivative_table().to_vec();
    let mut out = f.map_modes(true, |idx, c| {
        let k = kt[idx];
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return c;
        }
        let kc = (c[0] * k[0] + c[1] * k[1] + c[2] * k[2]) / k2;
        [c[0] - kc * k[0], c[1] - kc * k[1], c[2] - kc * k[2]]
    });
    out.set_divergence_free(true);
    out
}
