//! Cutoff sweep: pairwise differences of truncated solutions shrink as the
//! smaller cutoff grows.

use hall_mhd::diagnostics::{friedrichs_sweep, ExperimentConfig};
use hall_mhd::dynamics::orszag_tang;
use hall_mhd::{DimMode, Grid};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::TwoPointFiveD, 64)?;
    let (u, b) = orszag_tang(&grid, 1.0);
    let mut cfg = ExperimentConfig::new(u, b, 1.0, 0.25);
    cfg.sample_every = 10;
    cfg.jobs = 4;
    let report = friedrichs_sweep(&cfg, &[8.0, 12.0, 16.0, 21.0])?;
    for p in &report.pairs {
        println!("n = {:>4}, m = {:>4}: final L² difference {:.4e}", p.n, p.m, p.final_total());
    }
    println!("{}", report.summary());
    Ok(())
}
