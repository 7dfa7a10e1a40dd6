//! Periodic-box geometry, transforms, field storage and sharp Fourier filters.

mod field;
mod filter;
mod grid;
pub mod snapshot;

pub use field::{PhysicalVectorField, SpectralScalarField, SpectralVectorField, DIVERGENCE_TOLERANCE};
pub use filter::{
    apply_filter, dyadic_shell, fractional_laplacian, lambda_power, lambda_symbol, leray_project, max_shell,
    FrequencyFilter,
};
pub use grid::{DimMode, Grid};
pub use snapshot::Snapshot;

