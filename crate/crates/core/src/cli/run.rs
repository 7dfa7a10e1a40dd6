//! Experiment orchestration and artifact layout.
//!
//! Every experiment writes into the plan's output directory:
//!
//! ```text
//! manifest.toml                          resolved plan, version, status, timing
//! run_n={n}.csv                          run: the energy ledger
//! final.hmhd, snapshots/step_*.hmhd      run: HMHD1 snapshots
//! n={n}/converge_n={n}.csv               converge: one ledger per cutoff
//! converge_report.csv, converge_summary.txt
//! alpha={a}/alpha-sweep_alpha={a}.csv    alpha-sweep: one ledger per alpha
//! alpha-sweep_report.csv, alpha-sweep_summary.txt
//! diagnose_sigma={s}.csv, diagnose_summary.txt
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::plan::{ConfigDoc, DataSource, Experiment, RunPlan};
use crate::diagnostics::{alpha_probe, friedrichs_sweep, identity_audit, ExperimentConfig};
use crate::dynamics::{
    evolve, CsvLedgerWriter, EvolveConfig, LedgerRow, RunObserver, RunStatus, SimParams, SimState, StepConfig,
};
use crate::error::{Error, Result};
use crate::spectral::{Grid, Snapshot, SpectralVectorField};

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentStatus {
    Completed,
    /// At least one run diverged; artifacts are partial.
    Diverged(String),
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub status: ExperimentStatus,
    pub output: PathBuf,
    /// Paths relative to `output`.
    pub artifacts: Vec<PathBuf>,
    pub wall_time: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    experiment: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<&'a str>,
    wall_time_seconds: f64,
    /// `reference` for one job; `parallel` otherwise.
    mode: &'a str,
    jobs: usize,
    warnings: &'a [String],
    artifacts: Vec<String>,
    plan: ConfigDoc,
}

struct Artifacts {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn path(&mut self, rel: impl AsRef<Path>) -> Result<PathBuf> {
        let rel = rel.as_ref().to_path_buf();
        let full = self.root.join(&rel);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.written.push(rel);
        Ok(full)
    }

    fn text(&mut self, rel: impl AsRef<Path>, body: &str) -> Result<()> {
        let p = self.path(rel)?;
        fs::write(&p, body).map_err(|e| Error::io(&p, e))
    }
}

/// Streams the ledger to CSV and writes periodic snapshots.
struct FileObserver {
    ledger: CsvLedgerWriter<BufWriter<File>>,
    ledger_path: PathBuf,
    snapshots: Vec<(usize, PathBuf)>,
    snapshot_dir: PathBuf,
}

impl RunObserver for FileObserver {
    fn on_row(&mut self, row: &LedgerRow) -> Result<()> {
        self.ledger.on_row(row)
    }

    fn on_snapshot(&mut self, step: usize, state: &SimState) -> Result<()> {
        fs::create_dir_all(&self.snapshot_dir).map_err(|e| Error::io(&self.snapshot_dir, e))?;
        let name = format!("step_{step:08}.hmhd");
        let path = self.snapshot_dir.join(&name);
        snapshot_of(state).write(&path)?;
        self.snapshots.push((step, path));
        Ok(())
    }
}

fn snapshot_of(state: &SimState) -> Snapshot {
    Snapshot {
        alpha: state.params.alpha,
        t: state.t,
        u: state.u.clone(),
        b: state.b.clone(),
    }
}

/// Initial fields and start time.
fn initial_fields(plan: &RunPlan) -> Result<(SpectralVectorField, SpectralVectorField, f64)> {
    match &plan.data {
        DataSource::Preset(data) => {
            let grid = Grid::new(plan.dim, plan.points)?;
            let (u, b) = data.generate(&grid)?;
            Ok((u, b, 0.0))
        }
        DataSource::Snapshot(path) => {
            let s = Snapshot::read(path)?;
            Ok((s.u, s.b, s.t))
        }
    }
}

fn params(plan: &RunPlan, alpha: f64, cutoff: f64) -> SimParams {
    SimParams {
        alpha,
        cutoff,
        hall: plan.hall,
        freeze_velocity: plan.freeze_velocity,
    }
}

fn evolve_config(plan: &RunPlan) -> EvolveConfig {
    EvolveConfig {
        dt: plan.dt,
        step: StepConfig {
            cfl: plan.cfl,
            dt_max: plan.dt_max,
        },
        sigma: plan.sigma,
        ledger_every: plan.ledger_every,
        snapshot_every: plan.snapshot_every,
        ..EvolveConfig::default()
    }
}

fn experiment_config(plan: &RunPlan) -> Result<ExperimentConfig> {
    let (u0, b0, _) = initial_fields(plan)?;
    let mut cfg = ExperimentConfig::new(u0, b0, plan.alpha, plan.horizon);
    cfg.cutoff = plan.cutoff;
    cfg.hall = plan.hall;
    cfg.freeze_velocity = plan.freeze_velocity;
    cfg.evolve = EvolveConfig {
        snapshot_every: 0,
        ..evolve_config(plan)
    };
    cfg.sample_every = plan.sample_every;
    cfg.jobs = plan.jobs;
    Ok(cfg)
}

/// Executes the plan and writes its artifacts and manifest.
pub fn run_experiment(plan: &RunPlan) -> Result<RunSummary> {
    let start = Instant::now();
    fs::create_dir_all(&plan.output).map_err(|e| Error::io(&plan.output, e))?;
    let mut art = Artifacts {
        root: plan.output.clone(),
        written: Vec::new(),
    };
    let status = match plan.experiment {
        Experiment::Run => single_run(plan, &mut art)?,
        Experiment::Converge => converge(plan, &mut art)?,
        Experiment::AlphaSweep => alpha_sweep(plan, &mut art)?,
        Experiment::Diagnose => diagnose(plan, &mut art)?,
    };
    let wall_time = start.elapsed().as_secs_f64();
    let (status_name, divergence) = match &status {
        ExperimentStatus::Completed => ("completed", None),
        ExperimentStatus::Diverged(r) => ("diverged", Some(r.as_str())),
    };
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: plan.experiment.name(),
        status: status_name,
        divergence,
        wall_time_seconds: wall_time,
        mode: if plan.jobs == 1 { "reference" } else { "parallel" },
        jobs: plan.jobs,
        warnings: &plan.warnings,
        artifacts: art.written.iter().map(|p| p.display().to_string()).collect(),
        plan: plan.to_config(),
    };
    let body = toml::to_string(&manifest).map_err(|e| Error::format("manifest", e.to_string()))?;
    art.text("manifest.toml", &body)?;
    Ok(RunSummary {
        status,
        output: plan.output.clone(),
        artifacts: art.written,
        wall_time,
    })
}

fn status_of(status: &RunStatus) -> Option<String> {
    match status {
        RunStatus::Completed => None,
        RunStatus::Diverged { time, reason } => Some(format!("t = {time}: {reason}")),
    }
}

fn single_run(plan: &RunPlan, art: &mut Artifacts) -> Result<ExperimentStatus> {
    let (u0, b0, t0) = initial_fields(plan)?;
    let mut state = SimState::prepare(&u0, &b0, params(plan, plan.alpha, plan.cutoff))?;
    state.t = t0;
    let ledger_path = art.path(format!("run_n={}.csv", plan.cutoff))?;
    let file = File::create(&ledger_path).map_err(|e| Error::io(&ledger_path, e))?;
    let writer = CsvLedgerWriter::new(BufWriter::new(file)).map_err(|e| Error::io(&ledger_path, e))?;
    let mut obs = FileObserver {
        ledger: writer,
        ledger_path,
        snapshots: Vec::new(),
        snapshot_dir: plan.output.join("snapshots"),
    };
    let outcome = evolve(state, plan.horizon, &evolve_config(plan), &mut obs)?;
    let FileObserver {
        ledger,
        ledger_path,
        snapshots,
        ..
    } = obs;
    ledger
        .into_inner()
        .flush()
        .map_err(|e| Error::io(&ledger_path, e))?;
    for (step, _) in snapshots {
        art.written.push(PathBuf::from(format!("snapshots/step_{step:08}.hmhd")));
    }
    let final_path = art.path("final.hmhd")?;
    snapshot_of(&outcome.state).write(&final_path)?;
    Ok(match status_of(&outcome.status) {
        None => ExperimentStatus::Completed,
        Some(r) => ExperimentStatus::Diverged(r),
    })
}

fn converge(plan: &RunPlan, art: &mut Artifacts) -> Result<ExperimentStatus> {
    let cfg = experiment_config(plan)?;
    let report = friedrichs_sweep(&cfg, &plan.cutoffs)?;
    let mut diverged = Vec::new();
    for run in &report.runs {
        let p = art.path(format!("n={0}/converge_n={0}.csv", run.param))?;
        run.ledger.save(&p)?;
        if let Some(r) = status_of(&run.status) {
            diverged.push(format!("n = {}: {r}", run.param));
        }
    }
    art.text("converge_report.csv", &report.to_csv())?;
    art.text("converge_summary.txt", &report.summary())?;
    Ok(if diverged.is_empty() {
        ExperimentStatus::Completed
    } else {
        ExperimentStatus::Diverged(diverged.join("; "))
    })
}

fn alpha_sweep(plan: &RunPlan, art: &mut Artifacts) -> Result<ExperimentStatus> {
    let cfg = experiment_config(plan)?;
    let report = alpha_probe(&cfg, &plan.alphas)?;
    let mut diverged = Vec::new();
    for s in &report.series {
        let p = art.path(format!("alpha={0}/alpha-sweep_alpha={0}.csv", s.alpha))?;
        s.run.ledger.save(&p)?;
        if let Some(r) = status_of(&s.run.status) {
            diverged.push(format!("alpha = {}: {r}", s.alpha));
        }
    }
    art.text("alpha-sweep_report.csv", &report.to_csv())?;
    art.text("alpha-sweep_summary.txt", &report.summary())?;
    Ok(if diverged.is_empty() {
        ExperimentStatus::Completed
    } else {
        ExperimentStatus::Diverged(diverged.join("; "))
    })
}

/// Audits the snapshot with the α it records.
fn diagnose(plan: &RunPlan, art: &mut Artifacts) -> Result<ExperimentStatus> {
    let path = plan
        .snapshot
        .as_ref()
        .ok_or_else(|| Error::config("snapshot", "required by the diagnose experiment"))?;
    let snap = Snapshot::read(path)?;
    let state = SimState::new(snap.u, snap.b, snap.t, params(plan, snap.alpha, plan.cutoff))?;
    let table = identity_audit(&state, plan.sigma);
    art.text(format!("diagnose_sigma={}.csv", plan.sigma), &table.to_csv())?;
    art.text("diagnose_summary.txt", &table.summary())?;
    Ok(ExperimentStatus::Completed)
}
