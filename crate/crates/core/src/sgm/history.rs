//! Recorded space-time histories.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::forcing::ForcingSpec;
use crate::error::{config_err, range_err, Result};
use crate::spectral::{GridSpec1D, SpectralField1D};

/// Where a history came from. Some checks only make sense for solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistoryOrigin {
    Solver { linear_only: bool },
    Synthetic,
}

/// Per-step scalars recorded during a run: `int h^2`, `int h_xx^2`, `int f h`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub t0: f64,
    pub dt: f64,
    pub l2_sq: Vec<f64>,
    pub hxx_sq: Vec<f64>,
    pub forcing_work: Vec<f64>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.l2_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l2_sq.is_empty()
    }

    pub(crate) fn push(&mut self, h: &SpectralField1D, f: Option<&[num_complex::Complex64]>) {
        self.l2_sq.push(h.l2_norm_sq());
        let grid = h.grid();
        let mut acc = 0.0;
        let mut work = 0.0;
        for (j, c) in h.coeffs().iter().enumerate() {
            let k = grid.wavenumber(j);
            acc += k * k * k * k * c.norm_sqr();
            if let Some(f) = f {
                work += (f[j] * c.conj()).re;
            }
        }
        self.hxx_sq.push(grid.length * acc);
        self.forcing_work.push(grid.length * work);
    }

    /// Index of trace time `t`, if `t` sits on the trace grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        if self.dt <= 0.0 {
            return None;
        }
        let s = (t - self.t0) / self.dt;
        let i = s.round();
        if (s - i).abs() <= 1e-6 && i >= 0.0 && (i as usize) < self.len() {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Time-stamped snapshots of a periodic height field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeHistory {
    grid: GridSpec1D,
    alpha: f64,
    times: Vec<f64>,
    snapshots: Vec<SpectralField1D>,
    forcing: ForcingSpec,
    origin: HistoryOrigin,
    trace: Option<EnergyTrace>,
}

impl SpaceTimeHistory {
    /// Validates uniform strictly increasing times and matching grids.
    pub fn new(
        grid: GridSpec1D,
        alpha: f64,
        times: Vec<f64>,
        snapshots: Vec<SpectralField1D>,
        forcing: ForcingSpec,
        origin: HistoryOrigin,
    ) -> Result<Self> {
        grid.validate()?;
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(config_err!(
                "{} times for {} snapshots",
                times.len(),
                snapshots.len()
            ));
        }
        if snapshots.iter().any(|s| *s.grid() != grid) {
            return Err(config_err!("snapshot grid differs from the history grid"));
        }
        if times.len() > 1 {
            let step = times[1] - times[0];
            if !(step > 0.0) {
                return Err(config_err!("snapshot times must increase"));
            }
            for (i, t) in times.iter().enumerate() {
                let expect = times[0] + i as f64 * step;
                if (t - expect).abs() > 1e-9 * step.max(expect.abs()) {
                    return Err(config_err!("snapshot times are not uniformly spaced"));
                }
            }
        }
        Ok(Self {
            grid,
            alpha,
            times,
            snapshots,
            forcing,
            origin,
            trace: None,
        })
    }

    /// Time-independent field sampled at `count >= 2` uniform times on `[t_start, t_end]`.
    pub fn frozen(
        field: &SpectralField1D,
        alpha: f64,
        t_start: f64,
        t_end: f64,
        count: usize,
    ) -> Result<Self> {
        if count < 2 || !(t_end > t_start) {
            return Err(config_err!(
                "a frozen history needs two or more times on a proper interval"
            ));
        }
        let step = (t_end - t_start) / (count - 1) as f64;
        let times = (0..count).map(|i| t_start + i as f64 * step).collect();
        let snaps = (0..count).map(|_| field.clone()).collect();
        Self::new(
            *field.grid(),
            alpha,
            times,
            snaps,
            ForcingSpec::Zero,
            HistoryOrigin::Synthetic,
        )
    }

    pub fn with_trace(mut self, trace: Option<EnergyTrace>) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_origin(mut self, origin: HistoryOrigin) -> Self {
        self.origin = origin;
        self
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralField1D] {
        &self.snapshots
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn origin(&self) -> HistoryOrigin {
        self.origin
    }

    pub fn trace(&self) -> Option<&EnergyTrace> {
        self.trace.as_ref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot spacing (zero for a single snapshot).
    pub fn spacing(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    pub fn t_first(&self) -> f64 {
        self.times[0]
    }

    pub fn t_last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Index of the snapshot recorded at time `t`.
    pub fn snapshot_index(&self, t: f64) -> Result<usize> {
        let step = self.spacing();
        if self.times.len() == 1 {
            if (t - self.times[0]).abs() <= 1e-12 * (1.0 + t.abs()) {
                return Ok(0);
            }
        } else {
            let s = (t - self.times[0]) / step;
            let i = s.round();
            if (s - i).abs() <= 1e-6 && i >= 0.0 && (i as usize) < self.times.len() {
                return Ok(i as usize);
            }
        }
        Err(range_err!(
            "t = {t} is not a snapshot time in [{}, {}]",
            self.t_first(),
            self.t_last()
        ))
    }

    /// Checks that `[a, b]` lies inside the recorded slab.
    pub fn check_window(&self, a: f64, b: f64) -> Result<()> {
        let tol = 1e-12 * (1.0 + self.t_last().abs());
        if a < self.t_first() - tol || b > self.t_last() + tol {
            return Err(range_err!(
                "time window [{a}, {b}] escapes the recorded slab [{}, {}]",
                self.t_first(),
                self.t_last()
            ));
        }
        Ok(())
    }
}
