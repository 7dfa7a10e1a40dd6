mod common;

use common::{grid, random_field, random_solenoidal, rng, Vector};
use hall_mhd::lp::{
    besov_norm, besov_sobolev_envelope, bernstein_check, commutator_block, commutator_split,
    commutator_two_path_residual, decompose, dissipation_shell_ratios, embedding_constant, embedding_ratio,
    interpolation_check, paraproduct_split, paraproduct_split_dot, sobolev_norm,
};
use hall_mhd::operators::OperatorWorkspace;
use hall_mhd::{DimMode, FrequencyFilter, Grid, SpectralVectorField};
use proptest::prelude::*;

/// Shell index by floating-point logarithm, independent of the bit trick.
fn shell_of(k: [i32; 3]) -> i32 {
    let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
    if r2 == 0.0 {
        -1
    } else {
        let l = (0.5 * r2.log2()).floor() as i32;
        // guard exact powers of two against log rounding
        if 4f64.powi(l + 1) <= r2 {
            l + 1
        } else if 4f64.powi(l) > r2 {
            l - 1
        } else {
            l
        }
    }
}

/// A field whose modes all lie in shell `l`.
fn shell_field(g: &Grid, l: i32, seed: u64) -> SpectralVectorField {
    let mut r = rng(seed);
    let m = (g.points_per_axis() / 3) as i32;
    let v = random_solenoidal(&mut r, g.dim_mode(), m, 40, 1.0).retain(|k| shell_of(k) == l);
    v.to_field(g)
}

fn grids() -> impl Strategy<Value = Grid> {
    prop_oneof![
        Just(grid(DimMode::TwoPointFiveD, 32)),
        Just(grid(DimMode::TwoPointFiveD, 64)),
        Just(grid(DimMode::ThreeD, 16)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn blocks_partition_the_coefficients(g in grids(), seed in 0u64..1000) {
        let f = random_field(&g, seed, 20);
        let d = decompose(&f);
        prop_assert_eq!(d.reconstruct().max_coefficient_diff(&f), 0.0);
        let energy: f64 = d.block_norms().iter().map(|(_, n)| n * n).sum();
        prop_assert!((energy - f.l2_norm_squared()).abs() <= 1e-13 * f.l2_norm_squared());
        for (l, b) in d.blocks() {
            prop_assert!(b.is_supported_in(|idx| shell_of(g.wavevector(idx)) == l));
        }
        prop_assert_eq!(d.partial_sum(-1).max_abs_coefficient(), 0.0);
    }

    #[test]
    fn bernstein_ratio_lies_in_band(g in grids(), seed in 0u64..1000, l in 0i32..4, alpha in 0.1f64..2.0) {
        let f = shell_field(&g, l, seed);
        prop_assume!(f.max_abs_coefficient() > 0.0);
        let r = bernstein_check(&f, l, alpha).unwrap();
        prop_assert!(r.holds(), "{:?}", r);
        prop_assert!(r.ratio <= 4f64.powf(alpha) * (1.0 + 1e-14) && r.ratio >= 1.0 - 1e-14);
    }

    #[test]
    fn paraproduct_is_complete(g in grids(), seed in 0u64..1000) {
        let f = random_field(&g, seed, 12);
        let h = random_field(&g, seed + 7, 12);
        let mut ws = OperatorWorkspace::new(&g);
        let split = paraproduct_split_dot(&mut ws, &f, &h).unwrap();
        let direct = ws.dot(&f, &h).unwrap();
        let scale = direct.max_abs_coefficient().max(1e-300);
        prop_assert!(split.sum().max_coefficient_diff(&direct) <= 1e-12 * scale);
    }

    #[test]
    fn commutator_families_sum_to_the_commutator(g in grids(), seed in 0u64..1000, l in -1i32..5) {
        let u = random_field(&g, seed, 10);
        let f = random_field(&g, seed + 3, 10);
        let mut ws = OperatorWorkspace::new(&g);
        prop_assert!(commutator_two_path_residual(&mut ws, l, &u, &f).unwrap() <= 1e-13);
    }

    #[test]
    fn interpolation_ratio_at_most_one(g in grids(), seed in 0u64..1000, sigma in 0.5f64..4.0, t in 0.05f64..0.95) {
        let f = random_field(&g, seed, 15);
        let r = interpolation_check(&f, t * sigma, sigma).unwrap();
        prop_assert!(r <= 1.0 + 1e-14 && r > 0.0);
    }

    #[test]
    fn sobolev_over_besov_in_envelope(g in grids(), seed in 0u64..1000, s in 0.0f64..3.0) {
        let f = random_field(&g, seed, 15);
        let env = besov_sobolev_envelope(&g, s);
        let ratio = sobolev_norm(&f, s) / besov_norm(&f, s).value;
        prop_assert!(ratio >= env.lower * (1.0 - 1e-14) && ratio <= env.upper * (1.0 + 1e-14));
    }

    #[test]
    fn dissipation_bounded_below_by_shell_scale(g in grids(), seed in 0u64..1000, alpha in 0.1f64..2.0) {
        let b = random_field(&g, seed, 20);
        let (rows, (e_low, d_low)) = dissipation_shell_ratios(&b, alpha);
        prop_assert!(!rows.is_empty());
        for (_, r) in rows {
            prop_assert!(r >= 1.0 - 1e-14);
        }
        // solenoidal random data has no mean
        prop_assert_eq!(e_low, 0.0);
        prop_assert_eq!(d_low, 0.0);
    }
}

#[test]
fn envelope_contains_lattice_weights() {
    for (dim, n) in [(DimMode::TwoPointFiveD, 64), (DimMode::ThreeD, 16)] {
        let g = grid(dim, n);
        for s in [0.0, 0.5, 1.0, 2.5] {
            let env = besov_sobolev_envelope(&g, s);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for idx in 0..g.len() {
                let k = g.wavevector(idx);
                let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                let w = ((1.0 + r2).powf(s) / 4f64.powf(s * shell_of(k) as f64)).sqrt();
                lo = lo.min(w);
                hi = hi.max(w);
            }
            assert!(env.lower <= lo * (1.0 + 1e-15) && hi <= env.upper * (1.0 + 1e-15), "s = {s}");
            // the continuous ranges are attained up to at most a factor 2^s per side
            assert!(lo <= env.lower * 2f64.powf(s) * (1.0 + 1e-12));
            assert!(hi * 2f64.powf(s) >= env.upper * (1.0 - 1e-12));
        }
    }
}

#[test]
fn bernstein_preconditions() {
    let g = grid(DimMode::TwoPointFiveD, 32);
    let f = shell_field(&g, 2, 5);
    assert!(bernstein_check(&f, 3, 1.0).is_err());
    assert!(bernstein_check(&f, -1, 1.0).is_err());
    assert!(bernstein_check(&SpectralVectorField::zeros(&g), 2, 1.0).is_err());
    // a mode on the inner shell edge attains the lower end
    let m = SpectralVectorField::single_mode(&g, [4, 0, 0], 1, 1.0, 0.0).unwrap();
    assert!((bernstein_check(&m, 2, 0.75).unwrap().ratio - 1.0).abs() < 1e-15);
}

#[test]
fn paraproduct_pieces_of_single_modes() {
    // a low mode times a high mode lands wholly in T_low(high)
    let g = grid(DimMode::TwoPointFiveD, 64);
    let low = hall_mhd::SpectralScalarField::from_fn(&g, |x| x[0].cos());
    let high = hall_mhd::SpectralScalarField::from_fn(&g, |x| (8.0 * x[1]).sin());
    let mut ws = OperatorWorkspace::new(&g);
    let p = paraproduct_split(&mut ws, &low, &high).unwrap();
    let direct = ws.product(&low, &high);
    assert!(p.low_high.max_coefficient_diff(&direct) < 1e-15);
    assert!(p.high_low.max_abs_coefficient() < 1e-15);
    assert!(p.remainder.max_abs_coefficient() < 1e-15);
    let q = paraproduct_split(&mut ws, &high, &high).unwrap();
    assert!(q.low_high.max_abs_coefficient() < 1e-15);
    assert!(q.high_low.max_abs_coefficient() < 1e-15);
}

#[test]
fn commutator_families_localize() {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let mut ws = OperatorWorkspace::new(&g);
    // f in shell 4, u at low frequency: only shells near 4 see the first family
    let f = shell_field(&g, 4, 11);
    let u = shell_field(&g, 1, 12);
    for l in -1..=6 {
        let c = commutator_split(&mut ws, l, &u, &f).unwrap();
        let direct = commutator_block(&mut ws, l, &u, &f).unwrap();
        let scale = direct.l2_norm().max(1e-300);
        assert!(c.high_low.l2_norm() < 1e-13 * f.l2_norm() * u.l2_norm());
        if (l - 4).abs() > 2 {
            assert!(c.low_high.l2_norm() < 1e-13 * f.l2_norm() * u.l2_norm(), "l = {l}");
        }
        assert!((&c.sum() - &direct).l2_norm() <= 1e-12 * scale.max(f.l2_norm() * u.l2_norm()));
    }
    // the roles swapped: u high, f low, so the first family is empty;
    // the second keeps u·∇Δ_l f at l = 1 and does not localize
    for l in -1..=6 {
        let c = commutator_split(&mut ws, l, &f, &u).unwrap();
        assert!(c.low_high.l2_norm() < 1e-13 * f.l2_norm() * u.l2_norm());
        if l != 1 && (l - 4).abs() > 2 {
            assert!(c.high_low.l2_norm() < 1e-13 * f.l2_norm() * u.l2_norm(), "l = {l}");
        }
    }
}

#[test]
fn commutator_of_constant_velocity_vanishes() {
    // u constant commutes with every Fourier multiplier
    let g = grid(DimMode::ThreeD, 16);
    let mut ws = OperatorWorkspace::new(&g);
    let mut v = Vector::default();
    v.0[0].add_term([0, 0, 0], rustfft::num_complex::Complex64::new(0.7, 0.0));
    let u = v.to_field(&g);
    let f = random_field(&g, 9, 20);
    for l in -1..=3 {
        assert!(commutator_block(&mut ws, l, &u, &f).unwrap().l2_norm() < 1e-13 * f.l2_norm());
    }
}

/// `C² = Σ |k̃|² (1+|k|²)^{-σ} / (2π)^d` summed directly.
fn embedding_oracle(g: &Grid, sigma: f64) -> f64 {
    let n = g.points_per_axis() as i32;
    let d = g.spatial_dims();
    let half = n / 2;
    let range: Vec<i32> = (-half..half).collect();
    let mut sum = 0.0;
    let zs: Vec<i32> = if d == 3 { range.clone() } else { vec![0] };
    for &kx in &range {
        for &ky in &range {
            for &kz in &zs {
                let dk = |k: i32| if k == -half { 0.0 } else { k as f64 };
                let kt2 = dk(kx).powi(2) + dk(ky).powi(2) + dk(kz).powi(2);
                let k2 = (kx * kx + ky * ky + kz * kz) as f64;
                sum += kt2 * (1.0 + k2).powf(-sigma);
            }
        }
    }
    (sum / (2.0 * std::f64::consts::PI).powi(d as i32)).sqrt()
}

#[test]
fn embedding_constant_matches_direct_sum_and_saturates() {
    for (dim, sigma) in [(DimMode::TwoPointFiveD, 2.5), (DimMode::ThreeD, 2.75)] {
        let ns: &[usize] = if dim == DimMode::ThreeD { &[8, 16, 32] } else { &[16, 32, 64, 128] };
        let mut squares = Vec::new();
        for &n in ns {
            let g = grid(dim, n);
            let c = embedding_constant(&g, sigma);
            assert!((c - embedding_oracle(&g, sigma)).abs() < 1e-12 * c);
            squares.push(c * c);
        }
        // each doubling adds a shell whose share decays like 2^{d+2-2σ} < 1
        let gains: Vec<f64> = squares.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gains.iter().all(|&x| x > 0.0));
        for w in gains.windows(2) {
            assert!(w[1] < 0.85 * w[0], "{dim:?}: {gains:?}");
        }
    }
}

#[test]
fn embedding_ratio_respects_bound_under_refinement() {
    let coarse = grid(DimMode::TwoPointFiveD, 32);
    let fine = grid(DimMode::TwoPointFiveD, 64);
    let mut wc = OperatorWorkspace::new(&coarse);
    let mut wf = OperatorWorkspace::new(&fine);
    for seed in 0..5 {
        let f = random_field(&coarse, seed, 20);
        let up = f.resample(&fine).unwrap();
        assert!((sobolev_norm(&up, 2.5) - sobolev_norm(&f, 2.5)).abs() < 1e-12 * sobolev_norm(&f, 2.5));
        let rc = embedding_ratio(&mut wc, &f, 2.5);
        let rf = embedding_ratio(&mut wf, &up, 2.5);
        // coarse points are a subset of fine points
        assert!(rf >= rc * (1.0 - 1e-12));
        assert!(rf <= embedding_constant(&fine, 2.5));
        assert!(rc <= embedding_constant(&coarse, 2.5));
    }
    assert_eq!(embedding_ratio(&mut wc, &SpectralVectorField::zeros(&coarse), 2.5), 0.0);
}

#[test]
fn besov_of_single_mode() {
    let g = grid(DimMode::TwoPointFiveD, 32);
    let f = SpectralVectorField::single_mode(&g, [3, 0, 0], 2, 1.0, 0.0).unwrap();
    // |k| = 3 lies in shell 1
    let b = besov_norm(&f, 1.5).value;
    assert!((b - 2f64.powf(1.5) * f.l2_norm()).abs() < 1e-14 * b);
    let h = sobolev_norm(&f, 1.5);
    assert!((h - 10f64.powf(0.75) * f.l2_norm()).abs() < 1e-13 * h);
    assert!(FrequencyFilter::DyadicShell(1).apply(&f).unwrap() == f);
}
