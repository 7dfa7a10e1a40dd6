//! Dyadic blocks, Besov and Sobolev norms, Bernstein ratios and paraproducts.

use hall_mhd::dynamics::random_solenoidal;
use hall_mhd::lp::{
    bernstein_check, besov_norm, besov_sobolev_envelope, commutator_two_path_residual, decompose,
    interpolation_check, paraproduct_split_dot, sobolev_norm,
};
use hall_mhd::operators::OperatorWorkspace;
use hall_mhd::{DimMode, FrequencyFilter, Grid};

fn main() -> hall_mhd::Result<()> {
    let grid = Grid::new(DimMode::TwoPointFiveD, 64)?;
    let f = random_solenoidal(&grid, 1.0, 1.0, 21.0, 1)?;
    let g = random_solenoidal(&grid, 1.0, 2.0, 21.0, 2)?;

    let lp = decompose(&f);
    for (l, norm) in lp.block_norms() {
        println!("‖Δ_{l} f‖ = {norm:.5e}");
    }
    println!("partition defect {:e}", lp.reconstruct().max_coefficient_diff(&f));

    let s = 1.5;
    let ratio = sobolev_norm(&f, s) / besov_norm(&f, s).value;
    let env = besov_sobolev_envelope(&grid, s);
    println!("H^{s}/B^{s} ratio {ratio:.5} in [{:.5}, {:.5}]", env.lower, env.upper);

    for l in 0..4 {
        let shell = FrequencyFilter::DyadicShell(l).apply(&f)?;
        let b = bernstein_check(&shell, l, 1.0)?;
        println!("shell {l}: Bernstein ratio {:.5} (upper {:.1})", b.ratio, b.upper());
    }

    let mut ws = OperatorWorkspace::new(&grid);
    let split = paraproduct_split_dot(&mut ws, &f, &g)?;
    let direct = ws.dot(&f, &g)?;
    println!(
        "paraproduct: T_f g {:.4e}, T_g f {:.4e}, R {:.4e}, completeness {:.2e}",
        split.low_high.l2_norm(),
        split.high_low.l2_norm(),
        split.remainder.l2_norm(),
        split.sum().max_coefficient_diff(&direct)
    );
    for l in [-1, 0, 2, 4] {
        println!("commutator block {l}: two-path residual {:.2e}", commutator_two_path_residual(&mut ws, l, &f, &g)?);
    }
    println!("interpolation ratio {:.5}", interpolation_check(&f, 1.25, 2.5)?);
    Ok(())
}
