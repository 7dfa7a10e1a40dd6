//! Orszag-Tang evolution with the energy ledger: E(t) + ∫D stays at E(0).

use hall_mhd::dynamics::{evolve, orszag_tang, EvolveConfig, NullObserver, SimParams, SimState};
use hall_mhd::{DimMode, Grid};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::TwoPointFiveD, 64)?;
    let (u, b) = orszag_tang(&grid, 1.0);
    let state = SimState::prepare(&u, &b, SimParams::new(1.0, 21.0))?;
    let cfg = EvolveConfig { ledger_every: 50, sigma: 2.5, ..EvolveConfig::default() };
    let (end, ledger) = evolve(state, 0.5, &cfg, &mut NullObserver)?.into_result()?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "t", "E_u", "E_B", "∫D", "residual");
    for r in &ledger.rows {
        println!(
            "{:>8.4} {:>12.6e} {:>12.6e} {:>12.6e} {:>10.2e}",
            r.t, r.e_u, r.e_b, r.dissipation_integral, r.balance_residual
        );
    }
    println!("final t = {}, max residual / E(0) = {:.2e}", end.t, ledger.max_relative_balance());
    Ok(())
}
