//! H^σ boundedness of small smooth data across dissipation exponents.

use hall_mhd::diagnostics::{alpha_probe, ExperimentConfig};
use hall_mhd::dynamics::orszag_tang;
use hall_mhd::{DimMode, Grid};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::TwoPointFiveD, 64)?;
    let (u, b) = orszag_tang(&grid, 0.1);
    let mut cfg = ExperimentConfig::new(u, b, 1.0, 0.25);
    cfg.evolve.sigma = 2.5;
    let report = alpha_probe(&cfg, &[0.55, 0.6, 0.75, 1.0])?;
    for s in &report.series {
        println!(
            "α = {:<5} max ‖(u,B)‖_H^σ = {:.5e}  ∫‖Λ^α B‖²_H^σ = {:.5e}  bounded {}",
            s.alpha,
            s.max_norm(),
            s.final_integral(),
            s.bounded
        );
    }
    println!("{}", report.summary());
    Ok(())
}
