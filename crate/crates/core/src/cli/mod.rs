//! Command-line orchestration: configuration, experiment execution,
//! artifacts and plot tables.
//!
//! Exit codes: 0 success, 2 validation, 3 divergence, 4 I/O or format.

mod plan;
mod plotdata;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use plan::{
    default_sigma, parse_assignment, parse_config, ConfigDoc, DataSource, DtSpec, Experiment, RunPlan,
};
pub use plotdata::{alpha_table, cauchy_table, emit_plotdata, ledger_tables};
pub use run::{run_experiment, ExperimentStatus, RunSummary};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Parser, Debug)]
#[command(name = "hallmhd", version, about = "Friedrichs-truncated Hall-MHD with fractional magnetic diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// `auto` or a fixed step.
    #[arg(long)]
    pub dt: Option<String>,
    /// Steps between snapshots.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Any configuration key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve one configuration and write its ledger and snapshots.
    Run(CommonArgs),
    /// Audit the identities and bounds on a snapshot.
    Diagnose {
        snapshot: PathBuf,
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare runs across Friedrichs cutoffs.
    Converge {
        #[arg(long, value_delimiter = ',')]
        cutoffs: Option<Vec<f64>>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Track H^sigma norms across dissipation orders.
    AlphaSweep {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Convert a ledger or report CSV into plot tables.
    Plotdata {
        input: PathBuf,
        /// Directory for the tables; defaults to the input's directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn float_array(v: &[f64]) -> toml::Value {
    toml::Value::Array(v.iter().map(|&x| toml::Value::Float(x)).collect())
}

/// The configuration file path and the flag overrides of a subcommand.
pub fn overrides(command: &Command) -> crate::Result<(Option<PathBuf>, toml::Table)> {
    let mut t = toml::Table::new();
    let (experiment, common) = match command {
        Command::Run(c) => (Experiment::Run, c),
        Command::Diagnose { snapshot, sigma, common } => {
            t.insert("snapshot".into(), toml::Value::String(snapshot.display().to_string()));
            if let Some(s) = sigma {
                t.insert("sigma".into(), toml::Value::Float(*s));
            }
            (Experiment::Diagnose, common)
        }
        Command::Converge { cutoffs, common } => {
            if let Some(c) = cutoffs {
                t.insert("cutoffs".into(), float_array(c));
            }
            (Experiment::Converge, common)
        }
        Command::AlphaSweep { alphas, common } => {
            if let Some(a) = alphas {
                t.insert("alphas".into(), float_array(a));
            }
            (Experiment::AlphaSweep, common)
        }
        Command::Plotdata { .. } => return Ok((None, t)),
    };
    for s in &common.set {
        let (k, v) = parse_assignment(s)?;
        t.insert(k, v);
    }
    t.insert("experiment".into(), toml::Value::String(experiment.name().into()));
    if let Some(o) = &common.output {
        t.insert("output".into(), toml::Value::String(o.display().to_string()));
    }
    if let Some(s) = common.seed {
        let s = i64::try_from(s).map_err(|_| Error::config("seed", "exceeds the supported range"))?;
        t.insert("seed".into(), toml::Value::Integer(s));
    }
    if let Some(j) = common.jobs {
        t.insert("jobs".into(), toml::Value::Integer(j as i64));
    }
    if let Some(d) = &common.dt {
        let v = if d == "auto" {
            toml::Value::String(d.clone())
        } else {
            toml::Value::Float(
                d.parse()
                    .map_err(|_| Error::config("dt", format!("expected \"auto\" or a number, got {d:?}")))?,
            )
        };
        t.insert("dt".into(), v);
    }
    if let Some(s) = common.snapshot_every {
        t.insert("snapshot_every".into(), toml::Value::Integer(s as i64));
    }
    Ok((common.config.clone(), t))
}

fn execute(command: &Command) -> crate::Result<i32> {
    if let Command::Plotdata { input, output } = command {
        let dir = output
            .clone()
            .unwrap_or_else(|| input.parent().map(PathBuf::from).unwrap_or_default());
        for p in emit_plotdata(input, &dir)? {
            println!("wrote {}", p.display());
        }
        return Ok(EXIT_OK);
    }
    let (config, table) = overrides(command)?;
    let plan = parse_config(config.as_deref(), table)?;
    for w in &plan.warnings {
        eprintln!("warning: {w}");
    }
    let summary = run_experiment(&plan)?;
    println!(
        "{} finished in {:.2}s; {} artifacts in {}",
        plan.experiment,
        summary.wall_time,
        summary.artifacts.len(),
        summary.output.display()
    );
    Ok(match summary.status {
        ExperimentStatus::Completed => EXIT_OK,
        ExperimentStatus::Diverged(reason) => {
            eprintln!("diverged: {reason}");
            EXIT_DIVERGENCE
        }
    })
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
