mod common;

use common::{dealias_set, grid, random_solenoidal, rng, Vector};
use hall_mhd::operators::{curl, divergence, OperatorWorkspace};
use hall_mhd::{DimMode, PhysicalVectorField, SpectralScalarField, SpectralVectorField};

const DIMS: [DimMode; 2] = [DimMode::TwoPointFiveD, DimMode::ThreeD];

fn n_for(dim: DimMode) -> usize {
    match dim {
        DimMode::TwoPointFiveD => 32,
        DimMode::ThreeD => 16,
    }
}

/// Pairs of random solenoidal fields in the dealias set, as oracle values
/// and grid fields.
fn cases(seed: u64) -> Vec<(usize, Vector, Vector, SpectralVectorField, SpectralVectorField)> {
    let mut out = Vec::new();
    for dim in DIMS {
        let n = n_for(dim);
        let g = grid(dim, n);
        let m = (n / 3) as i32;
        let mut r = rng(seed);
        for _ in 0..3 {
            let a = random_solenoidal(&mut r, dim, m, 8, 1.0);
            let b = random_solenoidal(&mut r, dim, m, 8, 1.0);
            let (fa, fb) = (a.to_field(&g), b.to_field(&g));
            out.push((n, a, b, fa, fb));
        }
    }
    out
}

fn close(oracle: &Vector, got: &SpectralVectorField, what: &str) {
    let scale = oracle.max_abs().max(1.0);
    let err = oracle.max_diff(got);
    assert!(err <= 1e-12 * scale, "{what}: {err:e} against scale {scale:e}");
}

#[test]
fn linear_operators_match_oracle() {
    for (_, a, _, fa, _) in cases(1) {
        close(&a.curl(), &curl(&fa), "curl");
        let d = divergence(&fa);
        assert!(a.divergence().max_diff(&d) < 1e-12);
        assert!(d.max_abs_coefficient() < 1e-12);
        assert!(curl(&fa).is_divergence_free());
    }
}

#[test]
fn quadratic_products_match_truncated_oracle() {
    for (n, a, b, fa, fb) in cases(2) {
        let keep = dealias_set(n);
        let mut ws = OperatorWorkspace::new(fa.grid());
        close(&Vector::advect(&a, &b).retain(keep), &ws.advect(&fa, &fb).unwrap(), "advect");
        close(&Vector::advect(&b, &a).retain(keep), &ws.stretch(&fb, &fa).unwrap(), "stretch");
        close(&Vector::cross(&a, &b).retain(keep), &ws.cross(&fa, &fb).unwrap(), "cross");
        let dot = ws.dot(&fa, &fb).unwrap();
        let od = Vector::dot(&a, &b).retain(keep);
        assert!(od.max_diff(&dot) < 1e-12 * od.max_abs().max(1.0), "dot");
    }
}

#[test]
fn hall_term_matches_oracle() {
    for (n, _, b, _, fb) in cases(3) {
        let mut ws = OperatorWorkspace::new(fb.grid());
        let expected = Vector::cross(&b.curl(), &b).retain(dealias_set(n)).curl();
        close(&expected, &ws.hall_term(&fb), "hall");
    }
}

#[test]
fn hall_identities_hold_on_random_fields() {
    for (_, _, _, _, fb) in cases(4) {
        let mut ws = OperatorWorkspace::new(fb.grid());
        let r = ws.hall_identity_residuals(&fb);
        assert!(r.max_relative() <= 1e-10, "{r:?}");
        assert!(ws.hall_term(&fb).inner(&fb).abs() <= 1e-10 * fb.l2_norm_squared().max(1.0));
    }
}

#[test]
fn taylor_green_self_advection() {
    // u = (sin x cos y, −cos x sin y, 0): (u·∇)u = (½ sin 2x, ½ sin 2y, 0)
    let g = grid(DimMode::TwoPointFiveD, 32);
    let u = SpectralVectorField::to_spectral(&PhysicalVectorField::from_fn(&g, |x| {
        [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]
    }));
    let expected = SpectralVectorField::to_spectral(&PhysicalVectorField::from_fn(&g, |x| {
        [0.5 * (2.0 * x[0]).sin(), 0.5 * (2.0 * x[1]).sin(), 0.0]
    }));
    let mut ws = OperatorWorkspace::new(&g);
    assert!(ws.advect(&u, &u).unwrap().max_coefficient_diff(&expected) < 1e-15);
    // −Δp = ∇·((u·∇)u) = cos 2x + cos 2y, so p = ¼(cos 2x + cos 2y)
    let p = ws.compute_pressure(&u, &SpectralVectorField::zeros(&g)).unwrap();
    let pe = SpectralScalarField::from_fn(&g, |x| 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()));
    assert!(p.max_coefficient_diff(&pe) < 1e-15);
    // the magnetic part enters with the opposite sign
    let q = ws.compute_pressure(&SpectralVectorField::zeros(&g), &u).unwrap();
    assert!(q.max_coefficient_diff(&pe.multiply(|_| -1.0)) < 1e-15);
}

#[test]
fn force_free_field_has_no_hall_term() {
    // B = (sin y, sin x, 0) has ∇×B = (0, 0, cos x − cos y) and (∇×B)×B a gradient
    let g = grid(DimMode::TwoPointFiveD, 32);
    let b = SpectralVectorField::to_spectral(&PhysicalVectorField::from_fn(&g, |x| [x[1].sin(), x[0].sin(), 0.0]));
    let mut ws = OperatorWorkspace::new(&g);
    let h = ws.hall_term(&b).max_abs_coefficient();
    assert!(h < 1e-14, "{h:e}");
}

#[test]
fn shear_single_mode_has_zero_products() {
    // B = ẑ sin x: (B·∇)B = 0 and (∇×B)×B = ½∇(sin² x)
    let g = grid(DimMode::ThreeD, 16);
    let b = SpectralVectorField::single_mode(&g, [1, 0, 0], 2, 1.0, 0.0).unwrap();
    let mut ws = OperatorWorkspace::new(&g);
    assert!(ws.advect(&b, &b).unwrap().max_abs_coefficient() < 1e-16);
    assert!(ws.hall_term(&b).max_abs_coefficient() < 1e-16);
}
