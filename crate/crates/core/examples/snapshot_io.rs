//! Writing, reading and auditing HMHD1 snapshots.

use hall_mhd::diagnostics::identity_audit;
use hall_mhd::dynamics::{evolve, orszag_tang, EvolveConfig, NullObserver, SimParams, SimState};
use hall_mhd::spectral::Snapshot;
use hall_mhd::{DimMode, Grid};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::TwoPointFiveD, 32)?;
    let (u, b) = orszag_tang(&grid, 1.0);
    let state = SimState::prepare(&u, &b, SimParams::new(0.8, 10.0))?;
    let (state, _) = evolve(state, 0.05, &EvolveConfig::default(), &mut NullObserver)?.into_result()?;

    let snap = Snapshot { alpha: state.params.alpha, t: state.t, u: state.u.clone(), b: state.b.clone() };
    let bytes = snap.encode()?;
    let path = std::env::temp_dir().join("hall_mhd_example.hmhd");
    snap.write(&path)?;
    let back = Snapshot::read(&path)?;
    println!("{} bytes, t = {}, α = {}", bytes.len(), back.t, back.alpha);
    println!("bit-exact round trip: {}", back.encode()? == bytes && back == snap);

    let restored = SimState::new(back.u, back.b, back.t, state.params)?;
    println!("{}", identity_audit(&restored, 2.5).summary());
    std::fs::remove_file(&path).ok();
    Ok(())
}
