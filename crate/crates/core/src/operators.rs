//! Nonlinear differential operators of the Hall-MHD system, computed
//! pseudo-spectrally: derivatives are Fourier multipliers, products are formed
//! on the grid and sent back through the two-thirds dealiasing filter.
//!
//! For fields supported in the dealias set (`|k_i| <= N/3`), every quadratic
//! product returned here equals the exact product truncated to that set, and
//! grid sums of cubic products are exact integrals. The identity residuals
//! below therefore vanish to round-off for such fields.

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{FrequencyFilter, Grid, SpectralScalarField, SpectralVectorField};

/// Physical-space samples of the three components.
pub type Samples = [Vec<f64>; 3];

/// `grad[i][j] = ∂_i f_j` on the grid.
pub type GradientSamples = [Samples; 3];

/// `ik × f̂(k)`; divergence free by construction.
pub fn curl(f: &SpectralVectorField) -> SpectralVectorField {
    let kt = f.grid().derivative_table().to_vec();
    let i = Complex64::new(0.0, 1.0);
    let mut out = f.map_modes(false, |idx, c| {
        let k = kt[idx];
        [
            i * (c[2] * k[1] - c[1] * k[2]),
            i * (c[0] * k[2] - c[2] * k[0]),
            i * (c[1] * k[0] - c[0] * k[1]),
        ]
    });
    out.set_divergence_free(true);
    out
}

/// `∂_axis f` for each component.
pub fn partial(f: &SpectralVectorField, axis: usize) -> SpectralVectorField {
    let kt = f.grid().derivative_table().to_vec();
    f.map_modes(true, |idx, c| {
        let m = Complex64::new(0.0, kt[idx][axis]);
        c.map(|x| x * m)
    })
}

/// `∇·f` as a scalar field.
pub fn divergence(f: &SpectralVectorField) -> SpectralScalarField {
    let kt = f.grid().derivative_table();
    let coeffs = kt
        .iter()
        .enumerate()
        .map(|(idx, k)| {
            let c = f.coefficient(idx);
            Complex64::new(0.0, 1.0) * (c[0] * k[0] + c[1] * k[1] + c[2] * k[2])
        })
        .collect();
    SpectralScalarField::from_coefficients(f.grid(), coeffs).expect("length matches grid")
}

/// Three residuals of the Hall-term identities, raw and relative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HallResiduals {
    /// `|∫ ∇×((∇×B)×B) · B|`
    pub orthogonality: f64,
    /// `max_i |∫ ∂_i∇×((∇×B)×B)·∂_iB − ∫ ((∇×B)×∂_iB)·∂_i∇×B|`
    pub derivative_shift: f64,
    /// `‖B×(∇×B) − ½∇(B·B) + (B·∇)B‖_{L²}`
    pub vector_identity: f64,
    pub orthogonality_rel: f64,
    pub derivative_shift_rel: f64,
    pub vector_identity_rel: f64,
}

impl HallResiduals {
    pub fn max_relative(&self) -> f64 {
        self.orthogonality_rel
            .max(self.derivative_shift_rel)
            .max(self.vector_identity_rel)
    }
}

fn relative(raw: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        raw / scale
    } else {
        raw
    }
}

/// Scratch space for pseudo-spectral products on one grid. Not shareable;
/// create one per worker.
pub struct OperatorWorkspace {
    grid: Grid,
    dealias: FrequencyFilter,
    dealias_mask: Vec<bool>,
    cbuf: Vec<Complex64>,
}

impl OperatorWorkspace {
    pub fn new(grid: &Grid) -> Self {
        let dealias = FrequencyFilter::DealiasTwoThirds;
        OperatorWorkspace {
            grid: grid.clone(),
            dealias,
            dealias_mask: dealias.mask(grid),
            cbuf: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dealias_filter(&self) -> FrequencyFilter {
        self.dealias
    }

    pub fn dealias(&self, f: &SpectralVectorField) -> SpectralVectorField {
        let mask = &self.dealias_mask;
        let zero = Complex64::default();
        f.map_modes(true, |idx, c| if mask[idx] { c } else { [zero; 3] })
    }

    fn synth_into(&mut self, coeffs: &[Complex64], multiplier: Option<usize>, out: &mut Vec<f64>) {
        match multiplier {
            None => self.cbuf.copy_from_slice(coeffs),
            Some(axis) => {
                let kt = self.grid.derivative_table();
                for ((dst, c), k) in self.cbuf.iter_mut().zip(coeffs).zip(kt) {
                    *dst = c * Complex64::new(0.0, k[axis]);
                }
            }
        }
        self.grid.inverse(&mut self.cbuf);
        out.clear();
        out.extend(self.cbuf.iter().map(|c| c.re));
    }

    /// Grid samples of a spectral field.
    pub fn physical(&mut self, f: &SpectralVectorField) -> Samples {
        let mut out: Samples = Default::default();
        for (a, o) in out.iter_mut().enumerate() {
            self.synth_into(f.component(a), None, o);
        }
        out
    }

    pub fn physical_scalar(&mut self, f: &SpectralScalarField) -> Vec<f64> {
        let mut out = Vec::new();
        self.synth_into(f.coefficients(), None, &mut out);
        out
    }

    /// `∂_i f_j` on the grid; derivatives along absent axes are zero.
    pub fn physical_gradient(&mut self, f: &SpectralVectorField) -> GradientSamples {
        let d = self.grid.spatial_dims();
        let len = self.grid.len();
        let mut out: GradientSamples = Default::default();
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                if i < d {
                    self.synth_into(f.component(j), Some(i), o);
                } else {
                    *o = vec![0.0; len];
                }
            }
        }
        out
    }

    /// Forward transform of grid samples followed by the dealias filter.
    pub fn dealiased_spectral(&mut self, samples: &Samples) -> SpectralVectorField {
        let comps = [0, 1, 2].map(|a| self.dealiased_scalar_coeffs(&samples[a]));
        SpectralVectorField::from_coefficients(&self.grid, comps).expect("length matches grid")
    }

    fn dealiased_scalar_coeffs(&mut self, samples: &[f64]) -> Vec<Complex64> {
        for (dst, &x) in self.cbuf.iter_mut().zip(samples) {
            *dst = Complex64::new(x, 0.0);
        }
        self.grid.forward(&mut self.cbuf);
        self.cbuf
            .iter()
            .zip(&self.dealias_mask)
            .map(|(&c, &keep)| if keep { c } else { Complex64::default() })
            .collect()
    }

    pub fn dealiased_scalar(&mut self, samples: &[f64]) -> SpectralScalarField {
        let coeffs = self.dealiased_scalar_coeffs(samples);
        SpectralScalarField::from_coefficients(&self.grid, coeffs).expect("length matches grid")
    }

    /// `(u·∇)f`, dealiased.
    pub fn advect(&mut self, u: &SpectralVectorField, f: &SpectralVectorField) -> Result<SpectralVectorField> {
        u.check_grid(f)?;
        let up = self.physical(u);
        let grad = self.physical_gradient(f);
        let prod = transport(&up, &grad);
        Ok(self.dealiased_spectral(&prod))
    }

    /// `(B·∇)u`, the same kernel as [`advect`](Self::advect) with the roles
    /// swapped.
    pub fn stretch(&mut self, b: &SpectralVectorField, u: &SpectralVectorField) -> Result<SpectralVectorField> {
        self.advect(b, u)
    }

    /// `a × b`, dealiased.
    pub fn cross(&mut self, a: &SpectralVectorField, b: &SpectralVectorField) -> Result<SpectralVectorField> {
        a.check_grid(b)?;
        let ap = self.physical(a);
        let bp = self.physical(b);
        Ok(self.dealiased_spectral(&cross_samples(&ap, &bp)))
    }

    /// `a · b`, dealiased.
    pub fn dot(&mut self, a: &SpectralVectorField, b: &SpectralVectorField) -> Result<SpectralScalarField> {
        a.check_grid(b)?;
        let ap = self.physical(a);
        let bp = self.physical(b);
        let prod: Vec<f64> = (0..self.grid.len())
            .map(|i| ap[0][i] * bp[0][i] + ap[1][i] * bp[1][i] + ap[2][i] * bp[2][i])
            .collect();
        Ok(self.dealiased_scalar(&prod))
    }

    /// Pointwise product of two scalar fields, dealiased.
    pub fn product(&mut self, f: &SpectralScalarField, g: &SpectralScalarField) -> SpectralScalarField {
        assert_eq!(f.grid(), g.grid(), "grid mismatch in product");
        let fp = self.physical_scalar(f);
        let gp = self.physical_scalar(g);
        let prod: Vec<f64> = fp.iter().zip(&gp).map(|(a, b)| a * b).collect();
        self.dealiased_scalar(&prod)
    }

    /// `∇×((∇×B)×B)`: the current is formed spectrally, the Lorentz-type
    /// product on the grid, and one dealias pass precedes the outer curl.
    pub fn hall_term(&mut self, b: &SpectralVectorField) -> SpectralVectorField {
        let j = curl(b);
        let jp = self.physical(&j);
        let bp = self.physical(b);
        let jxb = self.dealiased_spectral(&cross_samples(&jp, &bp));
        curl(&jxb)
    }

    /// Pressure from `-Δp = ∇·(u·∇u − B·∇B)`, zero mean.
    pub fn compute_pressure(&mut self, u: &SpectralVectorField, b: &SpectralVectorField) -> Result<SpectralScalarField> {
        let h = &self.advect(u, u)? - &self.advect(b, b)?;
        let kt = self.grid.derivative_table();
        let coeffs = kt
            .iter()
            .enumerate()
            .map(|(idx, k)| {
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 == 0.0 {
                    return Complex64::default();
                }
                let c = h.coefficient(idx);
                Complex64::new(0.0, 1.0) * (c[0] * k[0] + c[1] * k[1] + c[2] * k[2]) / k2
            })
            .collect();
        SpectralScalarField::from_coefficients(&self.grid, coeffs)
    }

    /// Residuals of the orthogonality, derivative-shift and vector
    /// identities for the Hall term. Exact to round-off when `B` is
    /// solenoidal and supported in the dealias set.
    pub fn hall_identity_residuals(&mut self, b: &SpectralVectorField) -> HallResiduals {
        let grid = self.grid.clone();
        let vol_per_point = grid.volume() / grid.len() as f64;

        // Both integrals equal ∫ ∂^m((∇×B)×B) · ∂^m∇×B (m = 0, 1), so each
        // residual is scaled by the Cauchy-Schwarz bound of that integral,
        // which stays positive when the Hall term itself vanishes.
        let j = curl(b);
        let jp = self.physical(&j);
        let bp = self.physical(b);
        let jxb = self.dealiased_spectral(&cross_samples(&jp, &bp));
        let hall = curl(&jxb);
        let orthogonality = hall.inner(b).abs();
        let orthogonality_rel = relative(orthogonality, jxb.l2_norm() * j.l2_norm());

        let mut derivative_shift = 0.0f64;
        let mut derivative_shift_rel = 0.0f64;
        for axis in 0..grid.spatial_dims() {
            let d_hall = partial(&hall, axis);
            let d_b = partial(b, axis);
            let d_j = partial(&j, axis);
            let lhs = d_hall.inner(&d_b);
            let dbp = self.physical(&d_b);
            let djp = self.physical(&d_j);
            let jxdb = cross_samples(&jp, &dbp);
            let rhs: f64 = (0..grid.len())
                .map(|i| jxdb[0][i] * djp[0][i] + jxdb[1][i] * djp[1][i] + jxdb[2][i] * djp[2][i])
                .sum::<f64>()
                * vol_per_point;
            let diff = (lhs - rhs).abs();
            derivative_shift = derivative_shift.max(diff);
            let scale = partial(&jxb, axis).l2_norm() * d_j.l2_norm();
            derivative_shift_rel = derivative_shift_rel.max(relative(diff, scale));
        }

        let bxj = self.dealiased_spectral(&cross_samples(&bp, &jp));
        let half_b2 = self.dot(b, b).expect("same grid").multiply(|_| 0.5);
        let grad_half_b2 = half_b2.gradient();
        let b_grad_b = self.advect(b, b).expect("same grid");
        let residual = &(&bxj - &grad_half_b2) + &b_grad_b;
        let vector_identity = residual.l2_norm();
        let vector_identity_rel = relative(
            vector_identity,
            bxj.l2_norm() + grad_half_b2.l2_norm() + b_grad_b.l2_norm(),
        );

        HallResiduals {
            orthogonality,
            derivative_shift,
            vector_identity,
            orthogonality_rel,
            derivative_shift_rel,
            vector_identity_rel,
        }
    }
}

/// `Σ_i u_i ∂_i f_j` pointwise.
pub fn transport(u: &Samples, grad: &GradientSamples) -> Samples {
    let len = u[0].len();
    [0, 1, 2].map(|j| {
        (0..len)
            .map(|p| u[0][p] * grad[0][j][p] + u[1][p] * grad[1][j][p] + u[2][p] * grad[2][j][p])
            .collect()
    })
}

/// `a × b` pointwise.
pub fn cross_samples(a: &Samples, b: &Samples) -> Samples {
    let len = a[0].len();
    [
        (0..len).map(|p| a[1][p] * b[2][p] - a[2][p] * b[1][p]).collect(),
        (0..len).map(|p| a[2][p] * b[0][p] - a[0][p] * b[2][p]).collect(),
        (0..len).map(|p| a[0][p] * b[1][p] - a[1][p] * b[0][p]).collect(),
    ]
}
