//! The Friedrichs-truncated Hall-MHD system and its time integration.
//!
//! With `𝒥_n` the sharp ball filter and `𝒫` the Leray projection, the
//! truncated solution satisfies `𝒥_n𝒫u = u`, `𝒥_n𝒫B = B`, and evolves by
//!
//! ```text
//! ∂_t u = 𝒥_n𝒫(B·∇B − u·∇u)
//! ∂_t B = 𝒥_n𝒫(B·∇u − u·∇B − ∇×((∇×B)×B)) − (-Δ)^α B
//! ```
//!
//! The dissipation is diagonal in Fourier space and handled exactly by an
//! integrating factor; [`rhs`] returns the nonlinear parts only.

mod initial;
mod ledger;
mod stepper;

pub use initial::{orszag_tang, random_solenoidal, single_mode_decay, InitialData};
pub use ledger::{CsvLedgerWriter, EnergyLedger, LedgerRow, LEDGER_COLUMNS};
pub use stepper::{
    evolve, select_dt, step, DtPolicy, EvolveConfig, EvolveOutcome, NullObserver, RunObserver, RunStatus,
    StepConfig, StepOutput, Stepper,
};

use crate::error::{Error, Result};
use crate::operators::{cross_samples, curl, transport, OperatorWorkspace};
use crate::spectral::{leray_project, FrequencyFilter, SpectralVectorField};

/// Run parameters carried by a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    /// Fractional order of the magnetic diffusion `(-Δ)^α`.
    pub alpha: f64,
    /// Friedrichs radius `n`; must satisfy `n <= N/3`.
    pub cutoff: f64,
    /// Coefficient on the Hall term; 1 for Hall-MHD, 0 for resistive MHD.
    pub hall: f64,
    /// Hold `u ≡ 0` and evolve the magnetic field alone.
    pub freeze_velocity: bool,
}

impl SimParams {
    pub fn new(alpha: f64, cutoff: f64) -> Self {
        SimParams {
            alpha,
            cutoff,
            hall: 1.0,
            freeze_velocity: false,
        }
    }

    pub fn ball(&self) -> FrequencyFilter {
        FrequencyFilter::ball(self.cutoff)
    }
}

/// Tolerance on the relative divergence residual of a valid state.
pub const STATE_DIVERGENCE_TOLERANCE: f64 = 1e-12;

/// `(u, B, t)` with both fields solenoidal and supported in the
/// Friedrichs ball.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
    pub t: f64,
    pub params: SimParams,
}

impl SimState {
    /// Validates the invariants; no filtering is applied.
    pub fn new(u: SpectralVectorField, b: SpectralVectorField, t: f64, params: SimParams) -> Result<Self> {
        u.check_grid(&b).map_err(|e| Error::State(e.to_string()))?;
        let grid = u.grid().clone();
        if !(params.alpha > 0.0 && params.alpha.is_finite()) {
            return Err(Error::State(format!("alpha must be positive, got {}", params.alpha)));
        }
        let limit = grid.points_per_axis() as f64 / 3.0;
        if !(params.cutoff > 0.0 && params.cutoff <= limit) {
            return Err(Error::State(format!(
                "Friedrichs radius {} must lie in (0, N/3 = {limit:.4}]",
                params.cutoff
            )));
        }
        let ball = params.ball();
        for (name, f) in [("u", &u), ("B", &b)] {
            if !f.is_supported_in(|idx| ball.keeps(&grid, idx)) {
                return Err(Error::State(format!("{name} has modes outside the Friedrichs ball")));
            }
            let r = f.divergence_residual();
            if r > STATE_DIVERGENCE_TOLERANCE {
                return Err(Error::State(format!("{name} is not divergence free (residual {r:e})")));
            }
        }
        if params.freeze_velocity && u.max_abs_coefficient() != 0.0 {
            return Err(Error::State("frozen velocity must be zero".into()));
        }
        let mut u = u;
        let mut b = b;
        u.set_divergence_free(true);
        b.set_divergence_free(true);
        Ok(SimState { u, b, t, params })
    }

    /// Initial state `(𝒥_n𝒫u₀, 𝒥_n𝒫B₀)` at `t = 0`.
    pub fn prepare(u0: &SpectralVectorField, b0: &SpectralVectorField, params: SimParams) -> Result<Self> {
        params.ball().validate()?;
        let u = if params.freeze_velocity {
            SpectralVectorField::zeros(u0.grid())
        } else {
            params.ball().apply(&leray_project(u0))?
        };
        let b = params.ball().apply(&leray_project(b0))?;
        Self::new(u, b, 0.0, params)
    }

    pub fn grid(&self) -> &crate::spectral::Grid {
        self.u.grid()
    }

    /// `½‖u‖²`
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.u.l2_norm_squared()
    }

    /// `½‖B‖²`
    pub fn magnetic_energy(&self) -> f64 {
        0.5 * self.b.l2_norm_squared()
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.magnetic_energy()
    }

    /// `‖Λ^α B‖²_{L²}`
    pub fn dissipation(&self) -> f64 {
        magnetic_dissipation(&self.b, self.params.alpha, 0.0)
    }
}

/// `‖Λ^α B‖²_{H^σ} = (2π)^d Σ (1+|k|²)^σ |k|^{2α} |B̂|²`.
pub fn magnetic_dissipation(b: &SpectralVectorField, alpha: f64, sigma: f64) -> f64 {
    let grid = b.grid().clone();
    grid.volume()
        * b.weighted_energy(|idx| {
            let k2 = grid.norm2(idx);
            if k2 == 0 {
                0.0
            } else {
                let k2 = k2 as f64;
                k2.powf(alpha) * if sigma == 0.0 { 1.0 } else { (1.0 + k2).powf(sigma) }
            }
        })
}

/// Nonlinear tendencies `(du/dt, dB/dt)` of the truncated system, without
/// the dissipation. Both results are solenoidal and ball supported.
pub fn rhs(ws: &mut OperatorWorkspace, state: &SimState) -> Result<(SpectralVectorField, SpectralVectorField)> {
    if ws.grid() != state.grid() {
        return Err(Error::State("workspace grid differs from state grid".into()));
    }
    nonlinear_terms(ws, &state.u, &state.b, &state.params)
}

pub(crate) fn nonlinear_terms(
    ws: &mut OperatorWorkspace,
    u: &SpectralVectorField,
    b: &SpectralVectorField,
    params: &SimParams,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    let ball = params.ball();
    let bp = ws.physical(b);
    let grad_b = ws.physical_gradient(b);
    let jp = ws.physical(&curl(b));
    let jxb = ws.dealiased_spectral(&cross_samples(&jp, &bp));
    let mut hall = curl(&jxb);
    if params.hall != 1.0 {
        hall = hall.scale(params.hall);
    }

    let (du, db) = if params.freeze_velocity {
        let du = SpectralVectorField::zeros(u.grid());
        (du, &SpectralVectorField::zeros(u.grid()) - &hall)
    } else {
        let up = ws.physical(u);
        let grad_u = ws.physical_gradient(u);
        let lorentz = transport(&bp, &grad_b);
        let inertia = transport(&up, &grad_u);
        let stretching = transport(&bp, &grad_u);
        let induction = transport(&up, &grad_b);
        let du_samples = [0, 1, 2].map(|a| {
            lorentz[a]
                .iter()
                .zip(&inertia[a])
                .map(|(x, y)| x - y)
                .collect::<Vec<_>>()
        });
        let db_samples = [0, 1, 2].map(|a| {
            stretching[a]
                .iter()
                .zip(&induction[a])
                .map(|(x, y)| x - y)
                .collect::<Vec<_>>()
        });
        let du = ws.dealiased_spectral(&du_samples);
        let db = &ws.dealiased_spectral(&db_samples) - &hall;
        (du, db)
    };
    Ok((ball.apply(&leray_project(&du))?, ball.apply(&leray_project(&db))?))
}
