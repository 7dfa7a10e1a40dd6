//! The Hall term and the cancellations the energy estimates rest on.

use hall_mhd::dynamics::random_solenoidal;
use hall_mhd::operators::{curl, OperatorWorkspace};
use hall_mhd::{DimMode, Grid};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::ThreeD, 32)?;
    let mut ws = OperatorWorkspace::new(&grid);
    for seed in 0..5 {
        let b = random_solenoidal(&grid, 1.0, 1.0, grid.dealias_limit() as f64, seed)?;
        let hall = ws.hall_term(&b);
        let r = ws.hall_identity_residuals(&b);
        println!(
            "seed {seed}: ‖∇×(J×B)‖ = {:.4e}  ‖J‖ = {:.4e}  orthogonality {:.2e}  shift {:.2e}  vector {:.2e}",
            hall.l2_norm(),
            curl(&b).l2_norm(),
            r.orthogonality_rel,
            r.derivative_shift_rel,
            r.vector_identity_rel
        );
    }
    Ok(())
}
