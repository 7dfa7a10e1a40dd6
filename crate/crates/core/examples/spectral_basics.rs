//! Transforms, multipliers, filters and the Leray projection on a 2.5D grid.

use hall_mhd::spectral::{fractional_laplacian, leray_project};
use hall_mhd::{DimMode, FrequencyFilter, Grid, PhysicalVectorField, SpectralVectorField};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::TwoPointFiveD, 32)?;

    // a gradient plus a rotational part
    let samples = PhysicalVectorField::from_fn(&grid, |[x, y, _]| {
        [x.cos() * y.sin() + y.sin(), x.sin() * y.cos() - x.sin(), (2.0 * x).cos()]
    });
    let f = SpectralVectorField::to_spectral(&samples);
    let back = f.to_physical();
    println!("round trip error      {:.3e}", back.max_abs_diff(&samples));
    println!("divergence residual   {:.3e}", f.divergence_residual());

    let p = leray_project(&f);
    println!("after Leray           {:.3e}", p.divergence_residual());
    println!("projection idempotent {:.3e}", leray_project(&p).max_coefficient_diff(&p));

    // (-Δ)^α on |k|² = 2 multiplies by 2^α
    let lap = fractional_laplacian(&p, 0.75)?;
    println!("‖(-Δ)^0.75 P f‖ / ‖P f‖ = {:.6}", lap.l2_norm() / p.l2_norm());

    for filter in [FrequencyFilter::ball(1.5), FrequencyFilter::DealiasTwoThirds, FrequencyFilter::DyadicShell(0)] {
        let kept = filter.apply(&f)?;
        println!("{:<24} keeps ‖·‖ = {:.6}", filter.description(), kept.l2_norm());
    }
    Ok(())
}
