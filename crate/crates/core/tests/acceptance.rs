//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use common::{grid, random_field, random_solenoidal, rng};
use hall_mhd::diagnostics::{alpha_probe, friedrichs_sweep, ExperimentConfig};
use hall_mhd::dynamics::{evolve, orszag_tang, DtPolicy, EvolveConfig, NullObserver, SimParams, SimState};
use hall_mhd::lp::{
    besov_norm, besov_sobolev_envelope, bernstein_check, commutator_two_path_residual, decompose,
    interpolation_check, paraproduct_split_dot, sobolev_norm,
};
use hall_mhd::operators::OperatorWorkspace;
use hall_mhd::spectral::Snapshot;
use hall_mhd::{DimMode, FrequencyFilter, Grid, SpectralVectorField};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn energy_balance(freeze_velocity: bool) -> Outcome {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let (u, b) = orszag_tang(&g, 1.0);
    let mut params = SimParams::new(1.0, 64.0 / 3.0);
    params.freeze_velocity = freeze_velocity;
    let s0 = SimState::prepare(&u, &b, params).unwrap();
    let e0 = s0.total_energy();
    let out = evolve(s0, 0.5, &EvolveConfig::default(), &mut NullObserver).unwrap();
    let worst = out.ledger.rows.iter().map(|r| r.balance_residual).fold(0.0, f64::max) / e0;
    let frozen = !freeze_velocity || out.ledger.rows.iter().all(|r| r.e_u == 0.0);
    outcome(
        !out.diverged() && frozen && worst <= 1e-6 && out.state.t == 0.5,
        format!("{} rows, {} steps, max residual/E(0) = {worst:.3e}", out.ledger.rows.len(), out.steps),
    )
}

fn hall_suite() -> Outcome {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let mut ws = OperatorWorkspace::new(&g);
    let mut r = rng(2024);
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let b = random_solenoidal(&mut r, DimMode::TwoPointFiveD, 21, 24, 1.0).to_field(&g);
        let h = ws.hall_identity_residuals(&b);
        worst[0] = worst[0].max(h.orthogonality_rel);
        worst[1] = worst[1].max(h.derivative_shift_rel);
        worst[2] = worst[2].max(h.vector_identity_rel);
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-10),
        format!(
            "100 fields; orthogonality {:.2e}, derivative shift {:.2e}, vector identity {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

/// Shell-supported solenoidal field; retries seeds until the shell is hit.
fn shell_field(g: &Grid, l: i32, seed: u64) -> SpectralVectorField {
    let shell = FrequencyFilter::DyadicShell(l);
    let mut s = seed;
    loop {
        let f = shell.apply(&random_field(g, s, 60)).unwrap();
        if f.max_abs_coefficient() > 0.0 {
            return f;
        }
        s += 1_000_003;
    }
}

fn lp_suite() -> Outcome {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let mut ws = OperatorWorkspace::new(&g);
    let mut partition_ok = true;
    let mut bern = (f64::INFINITY, 0.0f64, true);
    let mut para = 0.0f64;
    let mut comm = 0.0f64;
    let mut interp = 0.0f64;
    let mut envelope_ok = true;
    for seed in 0..100u64 {
        let f = random_field(&g, seed, 20);
        let h = random_field(&g, seed + 500, 20);
        partition_ok &= decompose(&f).reconstruct().max_coefficient_diff(&f) == 0.0;

        let l = (seed % 4) as i32;
        let fs = shell_field(&g, l, seed);
        for alpha in [0.6, 1.0, 1.5] {
            let r = bernstein_check(&fs, l, alpha).unwrap();
            bern.0 = bern.0.min(r.ratio);
            bern.1 = bern.1.max(r.ratio / 4f64.powf(alpha));
            bern.2 &= r.ratio >= 1.0 && r.ratio <= 4f64.powf(alpha);
        }

        let split = paraproduct_split_dot(&mut ws, &f, &h).unwrap();
        let direct = ws.dot(&f, &h).unwrap();
        para = para.max(split.sum().max_coefficient_diff(&direct) / direct.max_abs_coefficient());

        if seed < 20 {
            for l in -1..=4 {
                comm = comm.max(commutator_two_path_residual(&mut ws, l, &f, &h).unwrap());
            }
        }

        interp = interp.max(interpolation_check(&f, 1.25, 2.5).unwrap());

        let s = 0.5 + (seed % 5) as f64 * 0.5;
        let ratio = sobolev_norm(&f, s) / besov_norm(&f, s).value;
        envelope_ok &= brute_force_envelope(&g, s).contains(ratio)
            && besov_sobolev_envelope(&g, s).lower <= ratio
            && ratio <= besov_sobolev_envelope(&g, s).upper;
    }
    let pass = partition_ok && bern.2 && para <= 1e-12 && comm <= 1e-13 && interp <= 1.0 && envelope_ok;
    outcome(
        pass,
        format!(
            "partition exact {partition_ok}; Bernstein min {:.6} max/4^α {:.6}; paraproduct {para:.2e}; \
             commutator {comm:.2e}; interpolation max {interp:.6}; envelope {envelope_ok}",
            bern.0, bern.1
        ),
    )
}

struct Range(f64, f64);

impl Range {
    fn contains(&self, x: f64) -> bool {
        x >= self.0 * (1.0 - 1e-14) && x <= self.1 * (1.0 + 1e-14)
    }
}

/// Extremes of `((1+|k|²)^s / 4^{s·l(k)})^{1/2}` over the grid lattice.
fn brute_force_envelope(g: &Grid, s: f64) -> Range {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for idx in 0..g.len() {
        let k = g.wavevector(idx);
        let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let l = if r2 == 0.0 { -1 } else { (0..40).rev().find(|&j| 4f64.powi(j) <= r2).unwrap() };
        let w = ((1.0 + r2).powf(s) / 4f64.powf(s * l as f64)).sqrt();
        lo = lo.min(w);
        hi = hi.max(w);
    }
    Range(lo, hi)
}

fn integrator_order() -> Outcome {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let (u, b) = orszag_tang(&g, 1.0);
    let s0 = SimState::prepare(&u, &b, SimParams::new(1.0, 64.0 / 3.0)).unwrap();
    let dt0 = 0.004;
    let finals: Vec<SimState> = (0..5)
        .map(|i| {
            let cfg = EvolveConfig {
                dt: DtPolicy::Fixed(dt0 / 2f64.powi(i)),
                ledger_every: usize::MAX,
                ..EvolveConfig::default()
            };
            evolve(s0.clone(), 0.1, &cfg, &mut NullObserver).unwrap().into_result().unwrap().0
        })
        .collect();
    let errors: Vec<f64> = finals
        .windows(2)
        .map(|w| (&w[0].u - &w[1].u).l2_norm().hypot((&w[0].b - &w[1].b).l2_norm()))
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        min >= 3.9,
        format!(
            "dt = {dt0}/2^i, i = 0..4; differences {}; orders {}",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" "),
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn cauchy_ladder() -> Outcome {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let (u, b) = orszag_tang(&g, 1.0);
    let mut cfg = ExperimentConfig::new(u, b, 1.0, 0.25);
    cfg.sample_every = 10;
    let report = friedrichs_sweep(&cfg, &[8.0, 12.0, 16.0, 21.0]).unwrap();
    let rungs = report
        .verdict
        .rungs
        .iter()
        .map(|(k, v)| format!("{k}: {v:.4e}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        report.verdict.monotone && !report.flagged() && report.verdict.rungs.len() == 3,
        format!("dt = {:.3e}; rungs {rungs}", report.dt),
    )
}

fn alpha_threshold() -> Outcome {
    let g = grid(DimMode::TwoPointFiveD, 64);
    let (u, b) = orszag_tang(&g, 0.1);
    let mut cfg = ExperimentConfig::new(u, b, 1.0, 0.25);
    cfg.evolve.sigma = 2.5;
    let report = alpha_probe(&cfg, &[0.6, 0.75, 1.0]).unwrap();
    let detail = report
        .series
        .iter()
        .map(|s| format!("α={}: max {:.4e}, ∫ {:.4e}", s.alpha, s.max_norm(), s.final_integral()))
        .collect::<Vec<_>>()
        .join("; ");
    let finite = report.series.iter().all(|s| s.final_integral().is_finite() && !s.diverged);
    outcome(report.all_bounded() && finite, detail)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join("fixture.toml");
    let mut files: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}"));
        let code = hall_mhd::cli::main_with_args([
            "hallmhd",
            "run",
            "--config",
            fixture.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return outcome(false, format!("fixture run exited {code}"));
        }
        let mut found = Vec::new();
        for sub in [out.clone(), out.join("snapshots")] {
            for e in fs::read_dir(&sub).unwrap() {
                let p = e.unwrap().path();
                let ext = p.extension().and_then(|x| x.to_str()).unwrap_or("");
                if ext == "csv" || ext == "hmhd" {
                    found.push((p.strip_prefix(&out).unwrap().display().to_string(), fs::read(&p).unwrap()));
                }
            }
        }
        found.sort();
        files.push(found);
    }
    let identical = files[0] == files[1];
    let mut round_trip = true;
    let mut snapshots = 0;
    for (name, bytes) in &files[0] {
        if name.ends_with(".hmhd") {
            snapshots += 1;
            let snap = Snapshot::decode(bytes).unwrap();
            round_trip &= snap.encode().unwrap() == *bytes;
            let path = dir.path().join("copy.hmhd");
            snap.write(&path).unwrap();
            round_trip &= Snapshot::read(&path).unwrap() == snap && fs::read(&path).unwrap() == *bytes;
        }
    }
    outcome(
        identical && round_trip && snapshots >= 2,
        format!("{} artifacts, {snapshots} snapshots; identical {identical}; round trip {round_trip}", files[0].len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 energy identity, magnetic field alone", || energy_balance(true)),
        ("2 total energy law, full system", || energy_balance(false)),
        ("3 Hall identity suite", hall_suite),
        ("4 Littlewood-Paley suite", lp_suite),
        ("5 integrator order", integrator_order),
        ("6 Friedrichs Cauchy ladder", cauchy_ladder),
        ("7 alpha threshold probe", alpha_threshold),
        ("8 determinism and snapshot format", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
