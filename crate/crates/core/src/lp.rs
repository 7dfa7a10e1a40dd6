//! Littlewood-Paley machinery with sharp dyadic shells.
//!
//! Block `Δ_l` keeps `2^l <= |k| < 2^(l+1)` for `l >= 0`; `Δ_{-1}` keeps the
//! low-frequency ball `|k| < 1`, which on the integer lattice is the zero
//! mode alone. Blocks with `l <= -2` are zero, so `S_j = Σ_{k=-1}^{j-1} Δ_k`
//! vanishes for `j <= -1`. Because the shells are disjoint index sets the
//! decomposition is an exact partition of the coefficients.

use crate::error::{Error, Result};
use crate::operators::{transport, GradientSamples, OperatorWorkspace, Samples};
use crate::spectral::{
    dyadic_shell, lambda_symbol, max_shell, FrequencyFilter, Grid, SpectralScalarField, SpectralVectorField,
};

/// The family `{Δ_l f}` for `l = -1..=l_max`.
#[derive(Clone, Debug)]
pub struct LpDecomposition {
    source: SpectralVectorField,
    blocks: Vec<SpectralVectorField>,
}

impl LpDecomposition {
    pub fn source(&self) -> &SpectralVectorField {
        &self.source
    }

    pub fn l_max(&self) -> i32 {
        self.blocks.len() as i32 - 2
    }

    /// `Δ_l f`; `None` outside `-1..=l_max`.
    pub fn block(&self, l: i32) -> Option<&SpectralVectorField> {
        if l < -1 {
            return None;
        }
        self.blocks.get((l + 1) as usize)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (i32, &SpectralVectorField)> {
        self.blocks.iter().enumerate().map(|(i, b)| (i as i32 - 1, b))
    }

    /// `S_j f = Σ_{k=-1}^{j-1} Δ_k f`.
    pub fn partial_sum(&self, j: i32) -> SpectralVectorField {
        let mut acc = SpectralVectorField::zeros(self.source.grid());
        for (l, b) in self.blocks() {
            if l <= j - 1 {
                acc = &acc + b;
            }
        }
        acc
    }

    /// `Σ_l Δ_l f`.
    pub fn reconstruct(&self) -> SpectralVectorField {
        self.partial_sum(self.l_max() + 1)
    }

    /// Shell norms `‖Δ_l f‖_{L²}`.
    pub fn block_norms(&self) -> Vec<(i32, f64)> {
        self.blocks().map(|(l, b)| (l, b.l2_norm())).collect()
    }
}

pub fn decompose(f: &SpectralVectorField) -> LpDecomposition {
    let l_max = max_shell(f.grid());
    let blocks = (-1..=l_max)
        .map(|l| FrequencyFilter::DyadicShell(l).apply(f).expect("valid shell index"))
        .collect();
    LpDecomposition {
        source: f.clone(),
        blocks,
    }
}

fn scalar_blocks(f: &SpectralScalarField) -> Vec<SpectralScalarField> {
    (-1..=max_shell(f.grid()))
        .map(|l| FrequencyFilter::DyadicShell(l).apply_scalar(f).expect("valid shell index"))
        .collect()
}

/// `‖f‖_{B^s_{2,2}}` with the `l = -1` block weighted by `2^{-s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovNorm {
    pub s: f64,
    pub value: f64,
}

pub fn besov_weight(norm2: i64, s: f64) -> f64 {
    2f64.powf(2.0 * s * dyadic_shell(norm2) as f64)
}

pub fn sobolev_weight(norm2: i64, s: f64) -> f64 {
    (1.0 + norm2 as f64).powf(s)
}

pub fn besov_norm(f: &SpectralVectorField, s: f64) -> BesovNorm {
    let value = decompose(f)
        .block_norms()
        .into_iter()
        .map(|(l, n)| 2f64.powf(2.0 * s * l as f64) * n * n)
        .sum::<f64>()
        .sqrt();
    BesovNorm { s, value }
}

/// `‖f‖_{H^s}` with multiplier `(1+|k|²)^{s/2}`.
pub fn sobolev_norm(f: &SpectralVectorField, s: f64) -> f64 {
    let grid = f.grid().clone();
    (grid.volume() * f.weighted_energy(|idx| sobolev_weight(grid.norm2(idx), s))).sqrt()
}

/// Two-sided bound on `‖f‖_{H^s} / ‖f‖_{B^s_{2,2}}` from the continuous
/// range of `(1+|ξ|²)^s / 4^{sl}` over each shell present on the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEnvelope {
    pub lower: f64,
    pub upper: f64,
}

impl NormEnvelope {
    pub fn contains(&self, ratio: f64) -> bool {
        ratio >= self.lower && ratio <= self.upper
    }

    pub fn excess(&self, ratio: f64) -> f64 {
        (self.lower - ratio).max(ratio - self.upper).max(0.0)
    }
}

pub fn besov_sobolev_envelope(grid: &Grid, s: f64) -> NormEnvelope {
    // l = -1 holds only k = 0: weight 1 / 2^{-2s}
    let mut lo = 2f64.powf(2.0 * s);
    let mut hi = lo;
    for l in 0..=max_shell(grid) {
        let r_lo = 4f64.powi(l);
        let r_hi = 4f64.powi(l + 1);
        let scale = 4f64.powf(s * l as f64);
        let a = (1.0 + r_lo).powf(s) / scale;
        let b = (1.0 + r_hi).powf(s) / scale;
        lo = lo.min(a.min(b));
        hi = hi.max(a.max(b));
    }
    NormEnvelope {
        lower: lo.sqrt(),
        upper: hi.sqrt(),
    }
}

/// Sharp-shell Bernstein ratio `‖Λ^{2α}f‖ / (2^{2αl} ‖f‖)`, which lies in
/// `[1, 2^{2α}]` for `f` supported in shell `l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinRatio {
    pub shell: i32,
    pub alpha: f64,
    pub ratio: f64,
}

impl BernsteinRatio {
    pub fn upper(&self) -> f64 {
        4f64.powf(self.alpha)
    }

    pub fn holds(&self) -> bool {
        self.ratio >= 1.0 - 1e-14 && self.ratio <= self.upper() * (1.0 + 1e-14)
    }

    pub fn excess(&self) -> f64 {
        (1.0 - self.ratio).max(self.ratio - self.upper()).max(0.0)
    }
}

pub fn bernstein_check(f_shell: &SpectralVectorField, l: i32, alpha: f64) -> Result<BernsteinRatio> {
    if l < 0 {
        return Err(Error::Precondition(format!("Bernstein check needs a shell l >= 0, got {l}")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    let grid = f_shell.grid().clone();
    if !f_shell.is_supported_in(|idx| dyadic_shell(grid.norm2(idx)) == l) {
        return Err(Error::Precondition(format!("field is not supported in dyadic shell {l}")));
    }
    let base = f_shell.weighted_energy(|_| 1.0);
    if base == 0.0 {
        return Err(Error::Precondition("Bernstein check on the zero field".into()));
    }
    let lifted = f_shell.weighted_energy(|idx| lambda_symbol(grid.norm2(idx), 2.0 * alpha).powi(2));
    let ratio = (lifted / base).sqrt() / 4f64.powf(alpha * l as f64);
    Ok(BernsteinRatio { shell: l, alpha, ratio })
}

/// Per shell `l >= 0` with nonzero content:
/// `∫ Δ_l B · (-Δ)^α Δ_l B / (2^{2αl} ‖Δ_l B‖²)`, bounded below by 1.
/// The `l = -1` block carries no dissipation and is reported as
/// `(‖Δ_{-1}B‖², ∫ Δ_{-1}B·(-Δ)^α Δ_{-1}B)` separately.
pub fn dissipation_shell_ratios(b: &SpectralVectorField, alpha: f64) -> (Vec<(i32, f64)>, (f64, f64)) {
    let grid = b.grid().clone();
    let mut rows = Vec::new();
    let mut low = (0.0, 0.0);
    for (l, block) in decompose(b).blocks() {
        let energy = block.weighted_energy(|_| 1.0);
        let diss = block.weighted_energy(|idx| lambda_symbol(grid.norm2(idx), 2.0 * alpha));
        if l == -1 {
            low = (grid.volume() * energy, grid.volume() * diss);
        } else if energy > 0.0 {
            rows.push((l, diss / (4f64.powf(alpha * l as f64) * energy)));
        }
    }
    (rows, low)
}

/// Bony decomposition `fg = T_f g + T_g f + R(f, g)` of the dealiased
/// product.
#[derive(Clone, Debug)]
pub struct Paraproduct {
    /// `T_f g = Σ_k S_{k-1}f · Δ_k g`
    pub low_high: SpectralScalarField,
    /// `T_g f = Σ_k Δ_k f · S_{k-1}g`
    pub high_low: SpectralScalarField,
    /// `R(f, g) = Σ_k Δ_k f · Δ̃_k g`, `Δ̃_k = Δ_{k-1} + Δ_k + Δ_{k+1}`
    pub remainder: SpectralScalarField,
}

impl Paraproduct {
    pub fn sum(&self) -> SpectralScalarField {
        &(&self.low_high + &self.high_low) + &self.remainder
    }
}

fn add_product(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for ((x, p), q) in acc.iter_mut().zip(a).zip(b) {
        *x += p * q;
    }
}

fn add_into(acc: &mut [f64], a: &[f64]) {
    for (x, p) in acc.iter_mut().zip(a) {
        *x += p;
    }
}

pub fn paraproduct_split(
    ws: &mut OperatorWorkspace,
    f: &SpectralScalarField,
    g: &SpectralScalarField,
) -> Result<Paraproduct> {
    if f.grid() != g.grid() || f.grid() != ws.grid() {
        return Err(Error::Shape("paraproduct operands live on different grids".into()));
    }
    let len = f.grid().len();
    let fb: Vec<Vec<f64>> = scalar_blocks(f).iter().map(|b| ws.physical_scalar(b)).collect();
    let gb: Vec<Vec<f64>> = scalar_blocks(g).iter().map(|b| ws.physical_scalar(b)).collect();
    let nb = fb.len();

    let mut low_high = vec![0.0; len];
    let mut high_low = vec![0.0; len];
    let mut remainder = vec![0.0; len];
    // running S_{k-1} for both operands
    let mut sf = vec![0.0; len];
    let mut sg = vec![0.0; len];
    for k in 0..nb {
        // storage position k holds Δ_{k-1}; S_{(k-1)-1} sums positions < k-1
        if k >= 2 {
            add_into(&mut sf, &fb[k - 2]);
            add_into(&mut sg, &gb[k - 2]);
        }
        add_product(&mut low_high, &sf, &gb[k]);
        add_product(&mut high_low, &fb[k], &sg);
        for j in k.saturating_sub(1)..(k + 2).min(nb) {
            add_product(&mut remainder, &fb[k], &gb[j]);
        }
    }
    Ok(Paraproduct {
        low_high: ws.dealiased_scalar(&low_high),
        high_low: ws.dealiased_scalar(&high_low),
        remainder: ws.dealiased_scalar(&remainder),
    })
}

/// Paraproduct pieces of the dot product `f·g`, summed over components.
pub fn paraproduct_split_dot(
    ws: &mut OperatorWorkspace,
    f: &SpectralVectorField,
    g: &SpectralVectorField,
) -> Result<Paraproduct> {
    f.check_grid(g)?;
    let mut acc: Option<Paraproduct> = None;
    for a in 0..3 {
        let fa = SpectralScalarField::from_coefficients(f.grid(), f.component(a).to_vec())?;
        let ga = SpectralScalarField::from_coefficients(g.grid(), g.component(a).to_vec())?;
        let p = paraproduct_split(ws, &fa, &ga)?;
        acc = Some(match acc {
            None => p,
            Some(q) => Paraproduct {
                low_high: &q.low_high + &p.low_high,
                high_low: &q.high_low + &p.high_low,
                remainder: &q.remainder + &p.remainder,
            },
        });
    }
    Ok(acc.expect("three components"))
}

/// `[Δ_l, v·∇]h = Δ_l(v·∇h) − v·∇(Δ_l h)`.
pub fn commutator_block(
    ws: &mut OperatorWorkspace,
    l: i32,
    v: &SpectralVectorField,
    h: &SpectralVectorField,
) -> Result<SpectralVectorField> {
    let shell = FrequencyFilter::DyadicShell(l);
    let outer = shell.apply(&ws.advect(v, h)?)?;
    let inner = ws.advect(v, &shell.apply(h)?)?;
    Ok(&outer - &inner)
}

/// `‖split − direct‖ / (‖u·∇f‖ + ‖u·∇Δ_l f‖)` between the family sum of
/// [`commutator_split`] and [`commutator_block`]; the raw difference when
/// both terms vanish. The scale is that of the full products, where the
/// rounding error of either path originates.
pub fn commutator_two_path_residual(
    ws: &mut OperatorWorkspace,
    l: i32,
    u: &SpectralVectorField,
    f: &SpectralVectorField,
) -> Result<f64> {
    let shell = FrequencyFilter::DyadicShell(l);
    let scale = ws.advect(u, f)?.l2_norm() + ws.advect(u, &shell.apply(f)?)?.l2_norm();
    let diff = (&commutator_split(ws, l, u, f)?.sum() - &commutator_block(ws, l, u, f)?).l2_norm();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// The three paraproduct families of `[Δ_l, u·∇]f`:
///
/// - `low_high = Σ_k [Δ_l, S_{k-1}u·∇] Δ_k f`
/// - `high_low = Σ_k [Δ_l, Δ_k u·∇] S_{k-1} f`
/// - `remainder = Σ_k [Δ_l, Δ_k u·∇] Δ̃_k f`
///
/// The sums run over every shell, so the families add up to the full
/// commutator exactly.
#[derive(Clone, Debug)]
pub struct CommutatorSplit {
    pub low_high: SpectralVectorField,
    pub high_low: SpectralVectorField,
    pub remainder: SpectralVectorField,
}

impl CommutatorSplit {
    pub fn sum(&self) -> SpectralVectorField {
        &(&self.low_high + &self.high_low) + &self.remainder
    }
}

fn accumulate_transport(acc: &mut Samples, v: &Samples, grad: &GradientSamples) {
    let t = transport(v, grad);
    for (a, b) in acc.iter_mut().zip(&t) {
        add_into(a, b);
    }
}

fn zero_samples(len: usize) -> Samples {
    [vec![0.0; len], vec![0.0; len], vec![0.0; len]]
}

pub fn commutator_split(
    ws: &mut OperatorWorkspace,
    l: i32,
    u: &SpectralVectorField,
    f: &SpectralVectorField,
) -> Result<CommutatorSplit> {
    u.check_grid(f)?;
    let shell = FrequencyFilter::DyadicShell(l);
    shell.validate()?;
    let len = u.grid().len();
    let ud = decompose(u);
    let fd = decompose(f);
    let zero = SpectralVectorField::zeros(u.grid());
    let block = |d: &LpDecomposition, k: i32| d.block(k).cloned().unwrap_or_else(|| zero.clone());

    // bilinear pieces before Δ_l is applied: Σ_k a_k·∇b_k
    let mut pre = [zero_samples(len), zero_samples(len), zero_samples(len)];
    // the same pieces with Δ_l applied to the differentiated factor
    let mut post = [zero_samples(len), zero_samples(len), zero_samples(len)];
    for k in -1..=ud.l_max() {
        let u_k = block(&ud, k);
        let f_k = block(&fd, k);
        let su = ud.partial_sum(k - 1);
        let sf = fd.partial_sum(k - 1);
        let f_tilde = &(&block(&fd, k - 1) + &f_k) + &block(&fd, k + 1);
        let pairs = [(&su, &f_k), (&u_k, &sf), (&u_k, &f_tilde)];
        for (family, (a, b)) in pairs.into_iter().enumerate() {
            if a.max_abs_coefficient() == 0.0 || b.max_abs_coefficient() == 0.0 {
                continue;
            }
            let ap = ws.physical(a);
            let grad_b = ws.physical_gradient(b);
            accumulate_transport(&mut pre[family], &ap, &grad_b);
            let grad_lb = ws.physical_gradient(&shell.apply(b)?);
            accumulate_transport(&mut post[family], &ap, &grad_lb);
        }
    }
    let mut out = Vec::with_capacity(3);
    for (p, q) in pre.iter().zip(&post) {
        let outer = shell.apply(&ws.dealiased_spectral(p))?;
        let inner = ws.dealiased_spectral(q);
        out.push(&outer - &inner);
    }
    let remainder = out.pop().unwrap();
    let high_low = out.pop().unwrap();
    let low_high = out.pop().unwrap();
    Ok(CommutatorSplit {
        low_high,
        high_low,
        remainder,
    })
}

/// `‖f‖_{H^{σ'}} / (‖f‖_{L²}^{1−σ'/σ} ‖f‖_{H^σ}^{σ'/σ})`, at most 1 by
/// Hölder's inequality in frequency. Zero for the zero field.
pub fn interpolation_check(f: &SpectralVectorField, sigma_prime: f64, sigma: f64) -> Result<f64> {
    if !(sigma_prime > 0.0 && sigma_prime < sigma) {
        return Err(Error::Parameter(format!(
            "interpolation needs 0 < sigma' < sigma, got sigma' = {sigma_prime}, sigma = {sigma}"
        )));
    }
    let mid = sobolev_norm(f, sigma_prime);
    if mid == 0.0 {
        return Ok(0.0);
    }
    let theta = sigma_prime / sigma;
    let bound = f.l2_norm().powf(1.0 - theta) * sobolev_norm(f, sigma).powf(theta);
    Ok(mid / bound)
}

/// `max_x |∇f(x)|` over the grid points, using the Frobenius norm of the
/// gradient matrix.
pub fn gradient_sup_norm(ws: &mut OperatorWorkspace, f: &SpectralVectorField) -> f64 {
    let grad = ws.physical_gradient(f);
    (0..f.grid().len())
        .map(|p| {
            grad.iter()
                .flat_map(|row| row.iter().map(move |c| c[p] * c[p]))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// `‖∇f‖_{L^∞} / ‖f‖_{H^σ}`; zero for the zero field.
pub fn embedding_ratio(ws: &mut OperatorWorkspace, f: &SpectralVectorField, sigma: f64) -> f64 {
    let hs = sobolev_norm(f, sigma);
    if hs == 0.0 {
        0.0
    } else {
        gradient_sup_norm(ws, f) / hs
    }
}

/// Cauchy-Schwarz bound `‖∇f‖_{L^∞} <= C ‖f‖_{H^σ}` for fields on this
/// lattice, `C² = Σ_k |k|² (1+|k|²)^{-σ} / (2π)^d`. The sum stays bounded
/// as the lattice grows exactly when `σ > 1 + d/2`.
pub fn embedding_constant(grid: &Grid, sigma: f64) -> f64 {
    let sum: f64 = (0..grid.len())
        .map(|idx| {
            let k = grid.derivative_wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            k2 * sobolev_weight(grid.norm2(idx), -sigma)
        })
        .sum();
    (sum / grid.volume()).sqrt()
}

/// Convenience: the scalar field of one vector component.
pub fn component_scalar(f: &SpectralVectorField, axis: usize) -> SpectralScalarField {
    SpectralScalarField::from_coefficients(f.grid(), f.component(axis).to_vec()).expect("length matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DimMode;

    fn grid() -> Grid {
        Grid::new(DimMode::TwoPointFiveD, 32).unwrap()
    }

    #[test]
    fn single_mode_lands_in_one_block() {
        let g = grid();
        let f = SpectralVectorField::single_mode(&g, [2, 0, 0], 1, 1.0, 0.0).unwrap();
        let d = decompose(&f);
        for (l, b) in d.blocks() {
            assert_eq!(b.max_abs_coefficient() > 0.0, l == 1, "block {l}");
        }
        let c = SpectralVectorField::single_mode(&g, [0, 0, 0], 0, 1.0, 0.0).unwrap();
        for (l, b) in decompose(&c).blocks() {
            assert_eq!(b.max_abs_coefficient() > 0.0, l == -1);
        }
        assert_eq!(decompose(&f).l_max(), 5);
    }

    #[test]
    fn partial_sums_vanish_below_origin() {
        let g = grid();
        let f = SpectralVectorField::single_mode(&g, [0, 0, 0], 0, 2.0, 0.0).unwrap();
        let d = decompose(&f);
        assert_eq!(d.partial_sum(-1).max_abs_coefficient(), 0.0);
        assert_eq!(d.partial_sum(0), f);
    }

    #[test]
    fn besov_single_block_values() {
        let g = grid();
        let f = SpectralVectorField::single_mode(&g, [4, 0, 0], 2, 1.0, 0.0).unwrap();
        let b = besov_norm(&f, 1.5);
        assert!((b.value - 4f64.powf(1.5) * f.l2_norm()).abs() < 1e-12 * b.value);
        let c = SpectralVectorField::single_mode(&g, [0, 0, 0], 0, 3.0, 0.0).unwrap();
        let b = besov_norm(&c, 2.0);
        assert!((b.value - 0.25 * c.l2_norm()).abs() < 1e-14);
    }

    #[test]
    fn bernstein_edges() {
        let g = grid();
        let low = SpectralVectorField::single_mode(&g, [4, 0, 0], 2, 1.0, 0.0).unwrap();
        let r = bernstein_check(&low, 2, 0.8).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-14);
        let high = SpectralVectorField::single_mode(&g, [7, 1, 0], 2, 1.0, 0.0).unwrap();
        let r = bernstein_check(&high, 2, 0.8).unwrap();
        assert!(r.ratio < r.upper() && r.ratio > 1.0);
        assert!(matches!(bernstein_check(&high, 1, 0.8), Err(Error::Precondition(_))));
        assert!(bernstein_check(&high, -1, 0.8).is_err());
    }

    #[test]
    fn interpolation_rejects_bad_order() {
        let g = grid();
        let f = SpectralVectorField::single_mode(&g, [1, 2, 0], 2, 1.0, 0.0).unwrap();
        assert!(interpolation_check(&f, 2.0, 1.0).is_err());
        assert!(interpolation_check(&f, 0.0, 1.0).is_err());
        let r = interpolation_check(&f, 1.0, 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dissipation_lower_bound_is_sharp_on_shell_edges() {
        let g = grid();
        let f = SpectralVectorField::single_mode(&g, [8, 0, 0], 2, 1.0, 0.0).unwrap();
        let (rows, low) = dissipation_shell_ratios(&f, 0.75);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0, 3);
        assert!((rows[0].1 - 1.0).abs() < 1e-14);
        assert_eq!(low, (0.0, 0.0));
    }
}
