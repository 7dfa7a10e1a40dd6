//! Lawson integrating-factor RK4 with exact magnetic decay, step-size
//! control and the run loop.

use rustfft::num_complex::Complex64;

use super::ledger::{EnergyLedger, LedgerRow};
use super::{nonlinear_terms, SimState};
use crate::error::{Error, Result};
use crate::lp::sobolev_norm;
use crate::operators::OperatorWorkspace;
use crate::spectral::{leray_project, Grid, SpectralVectorField};

/// Step-size control parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    pub cfl: f64,
    pub dt_max: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { cfl: 0.3, dt_max: 0.01 }
    }
}

/// `dt = cfl · min(h/max|u|, h²/(2 max|B|), h^{2α})`, capped by `dt_max`;
/// `dt_max` when both fields vanish.
pub fn select_dt(state: &SimState, cfg: &StepConfig) -> f64 {
    let umax = state.u.to_physical().max_magnitude();
    let bmax = state.b.to_physical().max_magnitude();
    select_dt_from_maxima(state.grid(), state.params.alpha, umax, bmax, cfg)
}

pub(crate) fn select_dt_from_maxima(grid: &Grid, alpha: f64, umax: f64, bmax: f64, cfg: &StepConfig) -> f64 {
    if umax == 0.0 && bmax == 0.0 {
        return cfg.dt_max;
    }
    let h = grid.spacing();
    let mut bound = h.powf(2.0 * alpha);
    if umax > 0.0 {
        bound = bound.min(h / umax);
    }
    if bmax > 0.0 {
        bound = bound.min(h * h / (2.0 * bmax));
    }
    (cfg.cfl * bound).min(cfg.dt_max)
}

/// Invariant drift measured before restoration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Drift {
    /// Relative divergence residuals of `u` and `B`.
    pub divergence_u: f64,
    pub divergence_b: f64,
    /// Largest coefficient outside the ball relative to the largest overall.
    pub leakage: f64,
}

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: SimState,
    /// RK4 quadrature of `∫ ‖Λ^α B‖²` over the step.
    pub dissipation: f64,
    /// RK4 quadrature of `∫ ‖Λ^α B‖²_{H^σ}` over the step.
    pub hs_dissipation: f64,
    pub drift: Drift,
}

/// Reusable integrator for one grid and one `(α, σ)` pair.
pub struct Stepper {
    ws: OperatorWorkspace,
    alpha: f64,
    sigma: f64,
    /// `|k|^{2α}`
    rate: Vec<f64>,
    /// `(2π)^d |k|^{2α}` and `(2π)^d |k|^{2α}(1+|k|²)^σ`
    weight: Vec<f64>,
    weight_hs: Vec<f64>,
    cached_dt: Option<f64>,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &Grid, alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        let vol = grid.volume();
        let rate: Vec<f64> = grid.norm2_table().iter().map(|&k2| (k2 as f64).powf(alpha)).collect();
        let weight: Vec<f64> = rate.iter().map(|r| vol * r).collect();
        let weight_hs = grid
            .norm2_table()
            .iter()
            .zip(&weight)
            .map(|(&k2, w)| w * (1.0 + k2 as f64).powf(sigma))
            .collect();
        Ok(Stepper {
            ws: OperatorWorkspace::new(grid),
            alpha,
            sigma,
            rate,
            weight,
            weight_hs,
            cached_dt: None,
            e_half: Vec::new(),
            e_full: Vec::new(),
        })
    }

    pub fn workspace(&mut self) -> &mut OperatorWorkspace {
        &mut self.ws
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn factors(&mut self, dt: f64) {
        if self.cached_dt == Some(dt) {
            return;
        }
        self.e_half = self.rate.iter().map(|r| (-r * dt / 2.0).exp()).collect();
        self.e_full = self.rate.iter().map(|r| (-r * dt).exp()).collect();
        self.cached_dt = Some(dt);
    }

    fn dissipation_pair(&self, b: &SpectralVectorField) -> (f64, f64) {
        let mut d = 0.0;
        let mut d_hs = 0.0;
        for idx in 0..self.weight.len() {
            let e: f64 = b.components().iter().map(|c| c[idx].norm_sqr()).sum();
            d += self.weight[idx] * e;
            d_hs += self.weight_hs[idx] * e;
        }
        (d, d_hs)
    }

    /// One step of size `dt`. Non-finite coefficients yield
    /// [`Error::Divergence`].
    pub fn step(&mut self, state: &SimState, dt: f64) -> Result<StepOutput> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("time step must be finite and non-negative, got {dt}")));
        }
        if state.params.alpha != self.alpha {
            return Err(Error::State(format!(
                "stepper built for alpha = {}, state has alpha = {}",
                self.alpha, state.params.alpha
            )));
        }
        if self.ws.grid() != state.grid() {
            return Err(Error::State("stepper grid differs from state grid".into()));
        }
        if dt == 0.0 {
            return Ok(StepOutput {
                state: state.clone(),
                dissipation: 0.0,
                hs_dissipation: 0.0,
                drift: Drift::default(),
            });
        }
        self.factors(dt);
        let p = state.params;
        let (un, bn) = (&state.u, &state.b);
        let eh = self.e_half.clone();
        let ef = self.e_full.clone();
        let h = dt / 2.0;

        let (k1u, k1b) = nonlinear_terms(&mut self.ws, un, bn, &p)?;
        let ua = lin(&[(un, None, 1.0), (&k1u, None, h)]);
        let ba = lin(&[(bn, Some(&eh), 1.0), (&k1b, Some(&eh), h)]);
        let (k2u, k2b) = nonlinear_terms(&mut self.ws, &ua, &ba, &p)?;
        let ub = lin(&[(un, None, 1.0), (&k2u, None, h)]);
        let bb = lin(&[(bn, Some(&eh), 1.0), (&k2b, None, h)]);
        let (k3u, k3b) = nonlinear_terms(&mut self.ws, &ub, &bb, &p)?;
        let uc = lin(&[(un, None, 1.0), (&k3u, None, dt)]);
        let bc = lin(&[(bn, Some(&ef), 1.0), (&k3b, Some(&eh), dt)]);
        let (k4u, k4b) = nonlinear_terms(&mut self.ws, &uc, &bc, &p)?;
        let s = dt / 6.0;
        let u_new = lin(&[
            (un, None, 1.0),
            (&k1u, None, s),
            (&k2u, None, 2.0 * s),
            (&k3u, None, 2.0 * s),
            (&k4u, None, s),
        ]);
        let b_new = lin(&[
            (bn, Some(&ef), 1.0),
            (&k1b, Some(&ef), s),
            (&k2b, Some(&eh), 2.0 * s),
            (&k3b, Some(&eh), 2.0 * s),
            (&k4b, None, s),
        ]);

        let stages = [(bn, 1.0), (&ba, 2.0), (&bb, 2.0), (&bc, 1.0)];
        let (mut q, mut q_hs) = (0.0, 0.0);
        for (b, w) in stages {
            let (d, d_hs) = self.dissipation_pair(b);
            q += w * s * d;
            q_hs += w * s * d_hs;
        }

        let t_new = state.t + dt;
        for (name, f) in [("u", &u_new), ("B", &b_new)] {
            if !all_finite(f) {
                return Err(Error::Divergence {
                    time: t_new,
                    reason: format!("non-finite coefficient in {name}"),
                });
            }
        }
        if !(q.is_finite() && q_hs.is_finite()) {
            return Err(Error::Divergence {
                time: t_new,
                reason: "non-finite dissipation quadrature".into(),
            });
        }

        let ball = p.ball();
        let grid = state.grid().clone();
        let drift = Drift {
            divergence_u: u_new.divergence_residual(),
            divergence_b: b_new.divergence_residual(),
            leakage: leakage(&u_new, &grid, &ball).max(leakage(&b_new, &grid, &ball)),
        };
        let restore = |f: &SpectralVectorField| -> Result<SpectralVectorField> {
            let f = self.ws.dealias(f);
            ball.apply(&leray_project(&f))
        };
        let u_new = restore(&u_new)?;
        let b_new = restore(&b_new)?;
        let next = SimState::new(u_new, b_new, t_new, p)?;
        Ok(StepOutput {
            state: next,
            dissipation: q,
            hs_dissipation: q_hs,
            drift,
        })
    }
}

fn all_finite(f: &SpectralVectorField) -> bool {
    f.components()
        .iter()
        .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

fn leakage(f: &SpectralVectorField, grid: &Grid, ball: &crate::spectral::FrequencyFilter) -> f64 {
    let scale = f.max_abs_coefficient();
    if scale == 0.0 {
        return 0.0;
    }
    let mut out = 0.0f64;
    for idx in 0..grid.len() {
        if !ball.keeps(grid, idx) {
            for c in f.coefficient(idx) {
                out = out.max(c.norm());
            }
        }
    }
    out / scale
}

/// `Σ c · E ∘ f` over the terms, with `E` an optional diagonal factor.
fn lin(terms: &[(&SpectralVectorField, Option<&[f64]>, f64)]) -> SpectralVectorField {
    let grid = terms[0].0.grid().clone();
    let len = grid.len();
    let solenoidal = terms.iter().all(|(f, _, _)| f.is_divergence_free());
    let mut comps: [Vec<Complex64>; 3] = Default::default();
    for (a, comp) in comps.iter_mut().enumerate() {
        *comp = vec![Complex64::default(); len];
        for (f, factor, c) in terms {
            let src = f.component(a);
            match factor {
                Some(e) => {
                    for idx in 0..len {
                        comp[idx] += src[idx] * (c * e[idx]);
                    }
                }
                None => {
                    for idx in 0..len {
                        comp[idx] += src[idx] * *c;
                    }
                }
            }
        }
    }
    SpectralVectorField::from_parts(&grid, comps, solenoidal)
}

/// One step with a freshly built integrator (`σ = 0`).
pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    let mut stepper = Stepper::new(state.grid(), state.params.alpha, 0.0)?;
    Ok(stepper.step(state, dt)?.state)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtPolicy {
    /// [`select_dt`] before every step.
    Auto,
    /// Equal steps no larger than the given value that land on the horizon.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveConfig {
    pub dt: DtPolicy,
    pub step: StepConfig,
    /// Sobolev index of the logged norms and the second dissipation integral.
    pub sigma: f64,
    /// Steps between ledger rows; the first and last state are always logged.
    pub ledger_every: usize,
    /// Steps between snapshots; 0 disables.
    pub snapshot_every: usize,
    /// A run whose `H^σ` norm exceeds this is declared divergent.
    pub blowup_threshold: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: DtPolicy::Auto,
            step: StepConfig::default(),
            sigma: 0.0,
            ledger_every: 1,
            snapshot_every: 0,
            blowup_threshold: 1e12,
        }
    }
}

/// Receiver for ledger rows and snapshots of one run.
pub trait RunObserver {
    fn on_row(&mut self, _row: &LedgerRow) -> Result<()> {
        Ok(())
    }

    fn on_snapshot(&mut self, _step: usize, _state: &SimState) -> Result<()> {
        Ok(())
    }
}

pub struct NullObserver;

impl RunObserver for NullObserver {}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged { time: f64, reason: String },
}

#[derive(Clone, Debug)]
pub struct EvolveOutcome {
    /// Final state, or the last finite state of a divergent run.
    pub state: SimState,
    pub ledger: EnergyLedger,
    pub status: RunStatus,
    pub steps: usize,
    /// Largest drift seen over the run.
    pub max_drift: Drift,
}

impl EvolveOutcome {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    /// The final state and ledger, or [`Error::Divergence`].
    pub fn into_result(self) -> Result<(SimState, EnergyLedger)> {
        match self.status {
            RunStatus::Completed => Ok((self.state, self.ledger)),
            RunStatus::Diverged { time, reason } => Err(Error::Divergence { time, reason }),
        }
    }
}

struct RunAccount {
    e0: f64,
    q: f64,
    q_hs: f64,
}

impl RunAccount {
    fn row(&self, ws: &mut OperatorWorkspace, state: &SimState, sigma: f64) -> LedgerRow {
        let e_u = state.kinetic_energy();
        let e_b = state.magnetic_energy();
        let hall_flux = ws.hall_term(&state.b).inner(&state.b);
        LedgerRow {
            t: state.t,
            e_u,
            e_b,
            dissipation: state.dissipation(),
            dissipation_integral: self.q,
            hs_u: sobolev_norm(&state.u, sigma),
            hs_b: sobolev_norm(&state.b, sigma),
            hs_dissipation_integral: self.q_hs,
            div_u: state.u.divergence_residual(),
            div_b: state.b.divergence_residual(),
            hall_flux,
            balance_residual: (e_u + e_b + self.q - self.e0).abs(),
        }
    }
}

/// Integrates to `t0 + horizon`, or until divergence.
pub fn evolve(
    state0: SimState,
    horizon: f64,
    cfg: &EvolveConfig,
    observer: &mut dyn RunObserver,
) -> Result<EvolveOutcome> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    let ledger_every = cfg.ledger_every.max(1);
    let mut stepper = Stepper::new(state0.grid(), state0.params.alpha, cfg.sigma)?;
    let t_end = state0.t + horizon;
    let fixed = match cfg.dt {
        DtPolicy::Fixed(dt) => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Parameter(format!("fixed time step must be positive, got {dt}")));
            }
            let steps = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
            Some((steps, horizon / steps as f64))
        }
        DtPolicy::Auto => None,
    };

    let mut acc = RunAccount {
        e0: state0.total_energy(),
        q: 0.0,
        q_hs: 0.0,
    };
    let mut ledger = EnergyLedger::default();
    let mut state = state0;
    let mut max_drift = Drift::default();
    let emit = |ledger: &mut EnergyLedger, row: LedgerRow, observer: &mut dyn RunObserver| -> Result<()> {
        observer.on_row(&row)?;
        ledger.rows.push(row);
        Ok(())
    };

    let first = acc.row(stepper.workspace(), &state, cfg.sigma);
    emit(&mut ledger, first, observer)?;
    if cfg.snapshot_every > 0 {
        observer.on_snapshot(0, &state)?;
    }

    let mut n = 0usize;
    let mut status = RunStatus::Completed;
    let mut logged = true;
    loop {
        let (dt, last) = match fixed {
            Some((steps, dt)) => {
                if n >= steps {
                    break;
                }
                (dt, n + 1 == steps)
            }
            None => {
                let remaining = t_end - state.t;
                if remaining <= 1e-12 * horizon.max(1.0) {
                    break;
                }
                let dt = select_dt(&state, &cfg.step);
                if dt >= remaining { (remaining, true) } else { (dt, false) }
            }
        };
        match stepper.step(&state, dt) {
            Ok(out) => {
                let mut next = out.state;
                if last {
                    next.t = t_end;
                }
                acc.q += out.dissipation;
                acc.q_hs += out.hs_dissipation;
                max_drift.divergence_u = max_drift.divergence_u.max(out.drift.divergence_u);
                max_drift.divergence_b = max_drift.divergence_b.max(out.drift.divergence_b);
                max_drift.leakage = max_drift.leakage.max(out.drift.leakage);
                state = next;
                n += 1;
                logged = false;
            }
            Err(Error::Divergence { time, reason }) => {
                status = RunStatus::Diverged { time, reason };
                break;
            }
            Err(e) => return Err(e),
        }
        let hs = sobolev_norm(&state.u, cfg.sigma).hypot(sobolev_norm(&state.b, cfg.sigma));
        let blown = !hs.is_finite() || hs > cfg.blowup_threshold;
        if n % ledger_every == 0 || last || blown {
            let row = acc.row(stepper.workspace(), &state, cfg.sigma);
            emit(&mut ledger, row, observer)?;
            logged = true;
        }
        if cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0 {
            observer.on_snapshot(n, &state)?;
        }
        if blown {
            status = RunStatus::Diverged {
                time: state.t,
                reason: format!("H^{} norm {hs:e} exceeds {:e}", cfg.sigma, cfg.blowup_threshold),
            };
            break;
        }
        if last {
            break;
        }
    }
    if !logged {
        let row = acc.row(stepper.workspace(), &state, cfg.sigma);
        emit(&mut ledger, row, observer)?;
    }
    Ok(EvolveOutcome {
        state,
        ledger,
        status,
        steps: n,
        max_drift,
    })
}
