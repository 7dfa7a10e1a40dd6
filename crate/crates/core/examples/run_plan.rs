//! Resolving a TOML run plan and executing it into an output directory.

use hall_mhd::cli::{parse_config, run_experiment, ConfigDoc};

fn main() -> hall_mhd::Result<()> {
    let out = std::env::temp_dir().join("hall_mhd_run_plan");
    let text = format!(
        "experiment = \"run\"\nN = 32\nalpha = 0.9\nn = 10\nT = 0.05\ndata = \"orszag-tang\"\nsnapshot_every = 10\noutput = {:?}\n",
        out.display().to_string()
    );
    let plan = ConfigDoc::from_toml_str(&text)?.resolve()?;
    println!("resolved plan:\n{}", plan.to_config().to_toml_string());
    let summary = run_experiment(&plan)?;
    println!("status {:?}, artifacts:", summary.status);
    for p in &summary.artifacts {
        println!("  {}", p.display());
    }
    // a file plus overrides resolves the same way
    let again = parse_config(None, text.parse().expect("toml"))?;
    assert_eq!(again.to_config(), plan.to_config());
    Ok(())
}
