//! Pseudo-spectral Hall-MHD with fractional magnetic diffusion `(-Δ)^α` on
//! periodic boxes.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: grids, FFTs, fields, Friedrichs/dealias/dyadic filters,
//!   the fractional Laplacian and the Leray projection, HMHD1 snapshots.
//! - [`operators`]: curl, transport, the Hall term, pressure recovery and the
//!   vector identities the energy method relies on.
//! - [`lp`]: Littlewood-Paley blocks, Besov and Sobolev norms, Bernstein
//!   ratios, Bony paraproducts and commutators.
//! - [`dynamics`]: the Friedrichs-truncated system, an integrating-factor
//!   RK4 stepper and the energy ledger.
//! - [`diagnostics`]: cutoff sweeps, the α probe and identity audits.
//! - [`cli`]: run plans, experiment orchestration and plot data.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod lp;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{DimMode, FrequencyFilter, Grid, PhysicalVectorField, SpectralScalarField, SpectralVectorField};
