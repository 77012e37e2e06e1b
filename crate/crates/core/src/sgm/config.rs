//! Solver configuration.

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::forcing::{ForcingSpec, InitialSpec};
use crate::error::{config_err, Result};
use crate::spectral::GridSpec1D;

/// Upper end of the admissible nonlinearity range; the critical case itself is excluded.
pub const ALPHA_CRITICAL: f64 = 7.0 / 3.0;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Fourth-order exponential Runge-Kutta.
    #[default]
    Etdrk4,
    /// First-order exponential Euler.
    ExpEuler,
}

fn default_stride() -> usize {
    1
}

fn default_ceiling() -> f64 {
    1e8
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    pub grid: GridSpec1D,
    #[serde(default)]
    pub forcing: ForcingSpec,
    pub initial: InitialSpec,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Drop the `d_xx |h_x|^alpha` term, leaving `h_t + h_xxxx = f`.
    #[serde(default)]
    pub linear_only: bool,
    /// Sup-norm above which the run is stopped as a suspected blow-up.
    #[serde(default = "default_ceiling")]
    pub sup_ceiling: f64,
    /// Record the per-step energy trace used by the energy balance.
    #[serde(default = "default_true")]
    pub record_trace: bool,
}

impl SolverConfig {
    /// Configuration with defaults for everything but the physics.
    pub fn new(alpha: f64, dt: f64, t_end: f64, grid: GridSpec1D, initial: InitialSpec) -> Self {
        Self {
            alpha,
            dt,
            t_end,
            grid,
            forcing: ForcingSpec::Zero,
            initial,
            snapshot_stride: 1,
            seed: 0,
            scheme: Scheme::Etdrk4,
            linear_only: false,
            sup_ceiling: default_ceiling(),
            record_trace: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < ALPHA_CRITICAL) {
            return Err(config_err!(
                "alpha = {} must lie strictly inside (1, 7/3)",
                self.alpha
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config_err!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(config_err!(
                "t_end = {} must be finite and non-negative",
                self.t_end
            ));
        }
        self.step_count()?;
        if self.snapshot_stride == 0 {
            return Err(config_err!("snapshot_stride must be at least 1"));
        }
        if !(self.sup_ceiling > 0.0) {
            return Err(config_err!("sup_ceiling must be positive"));
        }
        self.grid.validate()?;
        self.forcing.validate(&self.grid)?;
        self.initial.validate(&self.grid)
    }

    /// Number of steps; `t_end` must be an integer multiple of `dt`.
    pub fn step_count(&self) -> Result<usize> {
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.dt.max(self.t_end) {
            return Err(config_err!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end,
                self.dt
            ));
        }
        if steps > 1e10 {
            return Err(config_err!("{steps} steps requested; refusing"));
        }
        Ok(steps as usize)
    }
}
