//! Experiment procedures: the Friedrichs cutoff sweep, the α boundedness
//! probe and the identity audit of a live state.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dynamics::{
    evolve, select_dt, DtPolicy, EnergyLedger, EvolveConfig, RunObserver, RunStatus, SimParams, SimState,
};
use crate::error::{Error, Result};
use crate::lp::{
    besov_norm, besov_sobolev_envelope, bernstein_check, commutator_two_path_residual, decompose,
    dissipation_shell_ratios, embedding_constant, embedding_ratio, interpolation_check, paraproduct_split_dot,
    sobolev_norm,
};
use crate::operators::OperatorWorkspace;
use crate::spectral::{FrequencyFilter, SpectralVectorField};

/// Shared setup of a sweep: one initial condition, one horizon, one
/// integrator configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub u0: SpectralVectorField,
    pub b0: SpectralVectorField,
    pub alpha: f64,
    /// Friedrichs radius used by [`alpha_probe`].
    pub cutoff: f64,
    pub hall: f64,
    pub freeze_velocity: bool,
    pub horizon: f64,
    pub evolve: EvolveConfig,
    /// Steps between the sampled times of a cutoff sweep.
    pub sample_every: usize,
    /// Worker threads; runs themselves are sequential.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(u0: SpectralVectorField, b0: SpectralVectorField, alpha: f64, horizon: f64) -> Self {
        let cutoff = (u0.grid().points_per_axis() / 3) as f64;
        ExperimentConfig {
            u0,
            b0,
            alpha,
            cutoff,
            hall: 1.0,
            freeze_velocity: false,
            horizon,
            evolve: EvolveConfig::default(),
            sample_every: 1,
            jobs: 1,
        }
    }

    fn params(&self, alpha: f64, cutoff: f64) -> SimParams {
        SimParams {
            alpha,
            cutoff,
            hall: self.hall,
            freeze_velocity: self.freeze_velocity,
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| Error::Parameter(format!("cannot build worker pool: {e}")))
    }
}

/// `(‖u^n − u^m‖, ‖B^n − B^m‖)` after filtering both states to the smaller
/// ball.
pub fn pair_difference(a: &SimState, b: &SimState) -> Result<(f64, f64)> {
    let radius = a.params.cutoff.min(b.params.cutoff);
    let ball = FrequencyFilter::ball(radius);
    let du = &ball.apply(&a.u)? - &ball.apply(&b.u)?;
    let db = &ball.apply(&a.b)? - &ball.apply(&b.b)?;
    Ok((du.l2_norm(), db.l2_norm()))
}

struct Sampler {
    states: Vec<SimState>,
}

impl RunObserver for Sampler {
    fn on_snapshot(&mut self, _step: usize, state: &SimState) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

/// One run of a sweep.
#[derive(Clone, Debug)]
pub struct SweepRun {
    /// The swept value: a cutoff in [`ConvergenceReport`], an α in
    /// [`BoundednessReport`].
    pub param: f64,
    pub status: RunStatus,
    pub ledger: EnergyLedger,
}

impl SweepRun {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSeries {
    pub n: f64,
    pub m: f64,
    pub times: Vec<f64>,
    pub du: Vec<f64>,
    pub db: Vec<f64>,
}

impl PairSeries {
    /// `‖(u^n, B^n) − (u^m, B^m)‖` at each time.
    pub fn total(&self) -> Vec<f64> {
        self.du.iter().zip(&self.db).map(|(a, b)| a.hypot(*b)).collect()
    }

    pub fn final_total(&self) -> f64 {
        self.total().last().copied().unwrap_or(0.0)
    }

    pub fn max_total(&self) -> f64 {
        self.total().into_iter().fold(0.0, f64::max)
    }
}

/// Final-time differences grouped by `min(n, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyVerdict {
    /// `(min(n, m), largest final-time difference among its pairs)`,
    /// ascending in the first entry.
    pub rungs: Vec<(f64, f64)>,
    /// Allowed relative increase from one rung to the next.
    pub slack: f64,
    /// Absolute level below which differences count as round-off.
    pub floor: f64,
    /// Each rung is at most `(1 + slack)` times its predecessor plus `floor`.
    pub monotone: bool,
}

impl CauchyVerdict {
    pub fn from_pairs(pairs: &[PairSeries], slack: f64, floor: f64) -> Self {
        let mut rungs: Vec<(f64, f64)> = Vec::new();
        for p in pairs {
            let key = p.n.min(p.m);
            let v = p.final_total();
            match rungs.iter_mut().find(|(k, _)| *k == key) {
                Some(r) => r.1 = r.1.max(v),
                None => rungs.push((key, v)),
            }
        }
        rungs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = rungs.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + slack) + floor);
        CauchyVerdict {
            rungs,
            slack,
            floor,
            monotone,
        }
    }
}

pub const CAUCHY_SLACK: f64 = 0.05;

/// Round-off floor of the verdict relative to the initial `L²` norm.
pub const CAUCHY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub cutoffs: Vec<f64>,
    pub alpha: f64,
    pub horizon: f64,
    /// Common step size of every run.
    pub dt: f64,
    pub runs: Vec<SweepRun>,
    pub pairs: Vec<PairSeries>,
    pub verdict: CauchyVerdict,
}

impl ConvergenceReport {
    /// Fewer than two cutoffs: no pairs to compare.
    pub fn degenerate(&self) -> bool {
        self.cutoffs.len() < 2
    }

    /// Some run diverged; its pairs cover only the common prefix.
    pub fn flagged(&self) -> bool {
        self.runs.iter().any(SweepRun::diverged)
    }

    pub const CSV_HEADER: &'static str = "n,m,t,du,db,total";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for p in &self.pairs {
            for (i, t) in p.times.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
                    p.n,
                    p.m,
                    t,
                    p.du[i],
                    p.db[i],
                    p.du[i].hypot(p.db[i])
                );
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Friedrichs cutoff sweep");
        let _ = writeln!(s, "  alpha = {}, horizon = {}, dt = {:e}", self.alpha, self.horizon, self.dt);
        let _ = writeln!(s, "  cutoffs = {:?}", self.cutoffs);
        for r in &self.runs {
            let _ = writeln!(s, "  n = {}: {}", r.param, status_text(&r.status));
        }
        let _ = writeln!(s, "  final-time differences:");
        for p in &self.pairs {
            let _ = writeln!(s, "    (n, m) = ({}, {}): {:.6e}", p.n, p.m, p.final_total());
        }
        let _ = writeln!(s, "  by min(n, m):");
        for (k, v) in &self.verdict.rungs {
            let _ = writeln!(s, "    {k}: {v:.6e}");
        }
        let verdict = if self.degenerate() {
            "degenerate (fewer than two cutoffs)".to_string()
        } else if self.verdict.monotone {
            format!("nonincreasing within {:.0}% slack", 100.0 * self.verdict.slack)
        } else {
            "NOT monotone".to_string()
        };
        let _ = writeln!(s, "  verdict: {verdict}{}", if self.flagged() { " [flagged: diverged run]" } else { "" });
        s
    }
}

fn status_text(status: &RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".into(),
        RunStatus::Diverged { time, reason } => format!("diverged at t = {time}: {reason}"),
    }
}

/// Runs the same data at every cutoff with a shared step size and compares
/// all pairs on the common time grid.
pub fn friedrichs_sweep(cfg: &ExperimentConfig, cutoffs: &[f64]) -> Result<ConvergenceReport> {
    let grid = cfg.u0.grid().clone();
    let limit = grid.points_per_axis() as f64 / 3.0;
    if cutoffs.is_empty() {
        return Err(Error::Parameter("cutoff sweep needs at least one cutoff".into()));
    }
    for &n in cutoffs {
        if !(n > 0.0 && n <= limit) {
            return Err(Error::Precondition(format!("cutoff {n} violates 0 < n <= N/3 = {limit:.4}")));
        }
    }
    let states = cutoffs
        .iter()
        .map(|&n| SimState::prepare(&cfg.u0, &cfg.b0, cfg.params(cfg.alpha, n)))
        .collect::<Result<Vec<_>>>()?;
    let scale = states
        .iter()
        .map(|s| s.u.l2_norm().hypot(s.b.l2_norm()))
        .fold(0.0, f64::max);
    let dt = match cfg.evolve.dt {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Auto => states
            .iter()
            .map(|s| select_dt(s, &cfg.evolve.step))
            .fold(f64::INFINITY, f64::min),
    };
    let sample_every = cfg.sample_every.max(1);
    let evolve_cfg = EvolveConfig {
        dt: DtPolicy::Fixed(dt),
        snapshot_every: sample_every,
        ..cfg.evolve
    };

    let results: Vec<Result<(SweepRun, Vec<SimState>)>> = cfg.pool()?.install(|| {
        states
            .into_par_iter()
            .map(|s| {
                let param = s.params.cutoff;
                let mut sampler = Sampler { states: Vec::new() };
                let out = evolve(s, cfg.horizon, &evolve_cfg, &mut sampler)?;
                let mut samples = sampler.states;
                if samples.last().map(|x| x.t) != Some(out.state.t) && !out.diverged() {
                    samples.push(out.state.clone());
                }
                Ok((
                    SweepRun {
                        param,
                        status: out.status,
                        ledger: out.ledger,
                    },
                    samples,
                ))
            })
            .collect()
    });
    let mut runs = Vec::with_capacity(results.len());
    let mut samples = Vec::with_capacity(results.len());
    for r in results {
        let (run, s) = r?;
        runs.push(run);
        samples.push(s);
    }

    let mut pairs = Vec::new();
    for i in 0..cutoffs.len() {
        for j in i + 1..cutoffs.len() {
            let len = samples[i].len().min(samples[j].len());
            let mut series = PairSeries {
                n: cutoffs[i],
                m: cutoffs[j],
                times: Vec::with_capacity(len),
                du: Vec::with_capacity(len),
                db: Vec::with_capacity(len),
            };
            for k in 0..len {
                let (du, db) = pair_difference(&samples[i][k], &samples[j][k])?;
                series.times.push(samples[i][k].t);
                series.du.push(du);
                series.db.push(db);
            }
            pairs.push(series);
        }
    }
    let completed: Vec<PairSeries> = pairs
        .iter()
        .filter(|p| {
            runs.iter()
                .filter(|r| r.param == p.n || r.param == p.m)
                .all(|r| !r.diverged())
        })
        .cloned()
        .collect();
    Ok(ConvergenceReport {
        cutoffs: cutoffs.to_vec(),
        alpha: cfg.alpha,
        horizon: cfg.horizon,
        dt,
        runs,
        verdict: CauchyVerdict::from_pairs(&completed, CAUCHY_SLACK, CAUCHY_FLOOR * scale),
        pairs,
    })
}

#[derive(Clone, Debug)]
pub struct AlphaSeries {
    pub alpha: f64,
    pub run: SweepRun,
    pub times: Vec<f64>,
    /// `‖(u, B)‖_{H^σ}`
    pub hs_norm: Vec<f64>,
    /// `∫₀ᵗ ‖Λ^α B‖²_{H^σ} dτ`
    pub hs_integral: Vec<f64>,
    pub reached_horizon: bool,
    /// Reached the horizon with every logged norm finite.
    pub bounded: bool,
    pub diverged: bool,
}

impl AlphaSeries {
    pub fn max_norm(&self) -> f64 {
        self.hs_norm.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_integral(&self) -> f64 {
        self.hs_integral.last().copied().unwrap_or(0.0)
    }

    /// Largest relative gap between the `H^σ` dissipation integral and the
    /// `L²` one; meaningful at `σ = 0`, where they coincide.
    pub fn integral_cross_check(&self) -> f64 {
        self.run
            .ledger
            .rows
            .iter()
            .map(|r| {
                let d = (r.hs_dissipation_integral - r.dissipation_integral).abs();
                if d == 0.0 {
                    0.0
                } else {
                    d / r.dissipation_integral.abs().max(r.hs_dissipation_integral.abs())
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct BoundednessReport {
    pub sigma: f64,
    pub horizon: f64,
    pub cutoff: f64,
    pub series: Vec<AlphaSeries>,
}

impl BoundednessReport {
    pub fn all_bounded(&self) -> bool {
        self.series.iter().all(|s| s.bounded)
    }

    pub const CSV_HEADER: &'static str = "alpha,t,hs_norm,hs_integral";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for a in &self.series {
            for i in 0..a.times.len() {
                let _ = writeln!(
                    s,
                    "{},{:.17e},{:.17e},{:.17e}",
                    a.alpha, a.times[i], a.hs_norm[i], a.hs_integral[i]
                );
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "alpha boundedness probe");
        let _ = writeln!(s, "  sigma = {}, horizon = {}, n = {}", self.sigma, self.horizon, self.cutoff);
        for a in &self.series {
            let verdict = if a.bounded {
                "bounded"
            } else if a.diverged {
                "blew up"
            } else {
                "did not reach horizon"
            };
            let _ = writeln!(
                s,
                "  alpha = {}: {verdict}; max H^sigma norm {:.6e}; integral {:.6e}; {}",
                a.alpha,
                a.max_norm(),
                a.final_integral(),
                status_text(&a.run.status)
            );
        }
        s
    }
}

/// Runs the same data for every α and reports the `H^σ` history.
pub fn alpha_probe(cfg: &ExperimentConfig, alphas: &[f64]) -> Result<BoundednessReport> {
    if alphas.is_empty() {
        return Err(Error::Parameter("alpha probe needs at least one alpha".into()));
    }
    for &a in alphas {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be positive, got {a}")));
        }
    }
    let states = alphas
        .iter()
        .map(|&a| SimState::prepare(&cfg.u0, &cfg.b0, cfg.params(a, cfg.cutoff)))
        .collect::<Result<Vec<_>>>()?;
    let evolve_cfg = EvolveConfig {
        snapshot_every: 0,
        ..cfg.evolve
    };
    let t_end = cfg.horizon;
    let results: Vec<Result<AlphaSeries>> = cfg.pool()?.install(|| {
        states
            .into_par_iter()
            .map(|s| {
                let alpha = s.params.alpha;
                let out = evolve(s, cfg.horizon, &evolve_cfg, &mut crate::dynamics::NullObserver)?;
                let rows = &out.ledger.rows;
                let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
                let hs_norm: Vec<f64> = rows.iter().map(|r| r.hs_total()).collect();
                let hs_integral: Vec<f64> = rows.iter().map(|r| r.hs_dissipation_integral).collect();
                let diverged = out.diverged();
                let reached_horizon = !diverged && out.state.t == t_end;
                let finite = hs_norm.iter().chain(&hs_integral).all(|v| v.is_finite());
                Ok(AlphaSeries {
                    alpha,
                    run: SweepRun {
                        param: alpha,
                        status: out.status,
                        ledger: out.ledger,
                    },
                    times,
                    hs_norm,
                    hs_integral,
                    reached_horizon,
                    bounded: reached_horizon && finite,
                    diverged,
                })
            })
            .collect()
    });
    Ok(BoundednessReport {
        sigma: cfg.evolve.sigma,
        horizon: cfg.horizon,
        cutoff: cfg.cutoff,
        series: results.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub name: &'static str,
    /// The measured quantity (a norm, ratio or scale).
    pub value: f64,
    /// Distance from the identity or bound; 0 is exact.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditTable {
    pub sigma: f64,
    pub rows: Vec<AuditRow>,
}

impl AuditTable {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn row(&self, name: &str) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub const CSV_HEADER: &'static str = "identity,value,residual,tolerance,passed";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.17e},{:.17e},{:e},{}",
                r.name, r.value, r.residual, r.tolerance, r.passed
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = format!("identity audit (sigma = {})\n", self.sigma);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "  {:<26} {:>12.4e}  residual {:>10.3e}  tol {:>8.1e}  {}",
                r.name,
                r.value,
                r.residual,
                r.tolerance,
                if r.passed { "pass" } else { "FAIL" }
            );
        }
        s
    }
}

/// Tolerances of the audit rows.
pub mod tolerance {
    pub const HALL: f64 = 1e-10;
    pub const PARTITION: f64 = 0.0;
    pub const PARAPRODUCT: f64 = 1e-12;
    pub const COMMUTATOR: f64 = 1e-13;
    pub const ENVELOPE: f64 = 1e-12;
    pub const BERNSTEIN: f64 = 1e-12;
    pub const INTERPOLATION: f64 = 1e-12;
    pub const EMBEDDING: f64 = 1e-12;
    pub const DISSIPATION: f64 = 1e-12;
    pub const DIVERGENCE: f64 = 1e-12;
}

fn relative(raw: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        raw
    } else {
        raw / scale
    }
}

/// Evaluates the harmonic-analysis identities and bounds on `state`.
pub fn identity_audit(state: &SimState, sigma: f64) -> AuditTable {
    let grid = state.grid().clone();
    let mut ws = OperatorWorkspace::new(&grid);
    let b = &state.b;
    let u = &state.u;
    let alpha = state.params.alpha;
    let mut rows = Vec::new();
    let mut push = |name, value, residual: f64, tolerance| {
        rows.push(AuditRow {
            name,
            value,
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    };

    let hall = ws.hall_identity_residuals(b);
    push("hall_orthogonality", hall.orthogonality, hall.orthogonality_rel, tolerance::HALL);
    push("hall_derivative_shift", hall.derivative_shift, hall.derivative_shift_rel, tolerance::HALL);
    push("hall_vector_identity", hall.vector_identity, hall.vector_identity_rel, tolerance::HALL);

    let decomp = decompose(b);
    push(
        "lp_partition",
        b.max_abs_coefficient(),
        decomp.reconstruct().max_coefficient_diff(b),
        tolerance::PARTITION,
    );

    let para = paraproduct_split_dot(&mut ws, u, b).expect("same grid");
    let direct = ws.dot(u, b).expect("same grid");
    let scale = direct.l2_norm();
    push(
        "paraproduct_completeness",
        scale,
        relative((&para.sum() - &direct).l2_norm(), scale),
        tolerance::PARAPRODUCT,
    );

    let mut comm = 0.0f64;
    for l in -1..=decomp.l_max() {
        comm = comm.max(commutator_two_path_residual(&mut ws, l, u, b).expect("valid shell"));
    }
    push("commutator_two_path", comm, comm, tolerance::COMMUTATOR);

    let besov = besov_norm(b, sigma).value;
    let ratio = if besov == 0.0 { 0.0 } else { sobolev_norm(b, sigma) / besov };
    let envelope = besov_sobolev_envelope(&grid, sigma);
    let excess = if besov == 0.0 { 0.0 } else { envelope.excess(ratio) / envelope.upper };
    push("sobolev_besov_envelope", ratio, excess, tolerance::ENVELOPE);

    let mut bern = 0.0f64;
    let mut bern_worst = 0.0f64;
    for (l, block) in decomp.blocks() {
        if l < 0 || block.max_abs_coefficient() == 0.0 {
            continue;
        }
        let r = bernstein_check(block, l, alpha).expect("shell-supported block");
        bern = bern.max(r.excess() / r.upper());
        bern_worst = bern_worst.max(r.ratio);
    }
    push("bernstein_ratio", bern_worst, bern, tolerance::BERNSTEIN);

    let interp = interpolation_check(b, sigma / 2.0, sigma).unwrap_or(0.0);
    push("interpolation_ratio", interp, (interp - 1.0).max(0.0), tolerance::INTERPOLATION);

    let emb = embedding_ratio(&mut ws, b, sigma);
    let c = embedding_constant(&grid, sigma);
    push("embedding_ratio", emb, relative((emb - c).max(0.0), c), tolerance::EMBEDDING);

    let (shells, _) = dissipation_shell_ratios(b, alpha);
    let lowest = shells.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let lowest = if lowest.is_finite() { lowest } else { 0.0 };
    let deficit = if shells.is_empty() { 0.0 } else { (1.0 - lowest).max(0.0) };
    push("dissipation_lower_bound", lowest, deficit, tolerance::DISSIPATION);

    let div = u.divergence_residual().max(b.divergence_residual());
    push("divergence_free", div, div, tolerance::DIVERGENCE);

    AuditTable { sigma, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DimMode, Grid};

    #[test]
    fn zero_state_audit_is_exact() {
        let g = Grid::new(DimMode::TwoPointFiveD, 16).unwrap();
        let z = SpectralVectorField::zeros(&g);
        let s = SimState::prepare(&z, &z, SimParams::new(1.0, 5.0)).unwrap();
        let table = identity_audit(&s, 2.5);
        assert!(table.all_passed());
        assert!(table.rows.iter().all(|r| r.residual == 0.0), "{table:?}");
    }

    #[test]
    fn verdict_groups_by_smaller_cutoff() {
        let p = |n: f64, m: f64, v: f64| PairSeries {
            n,
            m,
            times: vec![0.0, 1.0],
            du: vec![0.0, v],
            db: vec![0.0, 0.0],
        };
        let v = CauchyVerdict::from_pairs(&[p(8.0, 12.0, 1.0), p(8.0, 16.0, 2.0), p(12.0, 16.0, 2.05)], 0.05, 0.0);
        assert_eq!(v.rungs, vec![(8.0, 2.0), (12.0, 2.05)]);
        assert!(v.monotone);
        let v = CauchyVerdict::from_pairs(&[p(8.0, 12.0, 1.0), p(12.0, 16.0, 1.2)], 0.05, 0.0);
        assert!(!v.monotone);
    }
}
