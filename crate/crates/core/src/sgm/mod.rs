//! Time integration of the generalized surface growth equation.

mod config;
mod forcing;
mod history;
mod residual;
mod stepper;

pub use config::{Scheme, SolverConfig, ALPHA_CRITICAL};
pub use forcing::{
    ForcingBump, ForcingMode, ForcingSpec, InitialMode, InitialSpec, PreparedForcing,
};
pub use history::{EnergyTrace, HistoryOrigin, SpaceTimeHistory};
pub use residual::{
    cancellation_on_grid, energy_residual, local_energy_residual, weak_form_residual,
};
pub(crate) use stepper::Coefficients;
pub use stepper::{run, step, RunError, Stepper};
