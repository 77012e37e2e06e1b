//! Pointwise samples of a history on an oversampled grid, with the
//! integration weights used by every cylinder functional.
//!
//! Integrals are exact integrals of the piecewise-linear interpolant of the
//! nodal values, in space (periodic) and in time. The weights are therefore
//! continuous in the window endpoints and monotone under window inclusion.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{config_err, range_err, Result};
use crate::quad::{interp_linear, interval_hat_weights, periodic_hat_weights};
use crate::sgm::SpaceTimeHistory;
use crate::spectral::SpectralField1D;

/// Default oversampling factor relative to the native grid.
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Nodal values `h, h_y, h_yy, f` of every snapshot on an oversampled grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHistory {
    length: f64,
    m: usize,
    native_n: usize,
    alpha: f64,
    t0: f64,
    spacing: f64,
    times: Vec<f64>,
    h: Vec<Vec<f64>>,
    hy: Vec<Vec<f64>>,
    hyy: Vec<Vec<f64>>,
    f: Option<Vec<Vec<f64>>>,
}

impl SampledHistory {
    /// Samples every snapshot on `oversample * n` points.
    pub fn new(hist: &SpaceTimeHistory, oversample: usize) -> Result<Self> {
        if oversample == 0 {
            return Err(config_err!("oversampling factor must be at least 1"));
        }
        let grid = *hist.grid();
        let m = oversample * grid.n;
        crate::fft::FftPlan::new(m)?;
        let count = hist.len();
        let mut h = Vec::with_capacity(count);
        let mut hy = Vec::with_capacity(count);
        let mut hyy = Vec::with_capacity(count);
        for s in hist.snapshots() {
            h.push(s.sample(m));
            hy.push(s.derivative(1).sample(m));
            hyy.push(s.derivative(2).sample(m));
        }
        let f = if hist.forcing().is_zero() {
            None
        } else {
            let prepared = hist.forcing().prepare(&grid)?;
            let mut buf = vec![Complex64::new(0.0, 0.0); grid.n];
            let mut out = Vec::with_capacity(count);
            for &t in hist.times() {
                prepared.coeffs_at(t, &mut buf);
                out.push(SpectralField1D::from_coeffs(grid, buf.clone())?.sample(m));
            }
            Some(out)
        };
        Ok(Self {
            length: grid.length,
            m,
            native_n: grid.n,
            alpha: hist.alpha(),
            t0: hist.t_first(),
            spacing: hist.spacing(),
            times: hist.times().to_vec(),
            h,
            hy,
            hyy,
            f,
        })
    }

    /// Builds directly from nodal arrays on `m` uniform points of `[0, length)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        length: f64,
        alpha: f64,
        times: Vec<f64>,
        h: Vec<Vec<f64>>,
        hy: Vec<Vec<f64>>,
        hyy: Vec<Vec<f64>>,
        f: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let count = times.len();
        if count == 0 || h.len() != count || hy.len() != count || hyy.len() != count {
            return Err(config_err!("sample arrays do not match the time axis"));
        }
        let m = h[0].len();
        let all = h.iter().chain(hy.iter()).chain(hyy.iter());
        if m < 2 || all.clone().any(|v| v.len() != m) {
            return Err(config_err!("sample arrays have inconsistent lengths"));
        }
        if let Some(f) = &f {
            if f.len() != count || f.iter().any(|v| v.len() != m) {
                return Err(config_err!("forcing samples do not match"));
            }
        }
        let spacing = if count > 1 { times[1] - times[0] } else { 0.0 };
        Ok(Self {
            length,
            m,
            native_n: m,
            alpha,
            t0: times[0],
            spacing,
            times,
            h,
            hy,
            hyy,
            f,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn native_n(&self) -> usize {
        self.native_n
    }

    pub fn dx(&self) -> f64 {
        self.length / self.m as f64
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_first(&self) -> f64 {
        self.times[0]
    }

    pub fn t_last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn h(&self, i: usize) -> &[f64] {
        &self.h[i]
    }

    pub fn hy(&self, i: usize) -> &[f64] {
        &self.hy[i]
    }

    pub fn hyy(&self, i: usize) -> &[f64] {
        &self.hyy[i]
    }

    pub fn forcing(&self, i: usize) -> Option<&[f64]> {
        self.f.as_ref().map(|f| f[i].as_slice())
    }

    /// Nodal weights of `B(x0, r)`. The ball may not wrap onto itself.
    pub fn ball_weights(&self, x0: f64, r: f64) -> Result<Vec<(usize, f64)>> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(config_err!("radius {r} must be positive"));
        }
        if 2.0 * r > self.length * (1.0 + 1e-12) {
            return Err(range_err!(
                "ball of radius {r} exceeds the period {}",
                self.length
            ));
        }
        Ok(periodic_hat_weights(self.m, self.dx(), x0 - r, x0 + r))
    }

    /// Time weights for `[a, b]`, which must lie inside the slab.
    pub fn time_weights(&self, a: f64, b: f64) -> Result<Vec<(usize, f64)>> {
        self.check_window(a, b)?;
        Ok(interval_hat_weights(
            self.times.len(),
            self.t0,
            self.spacing,
            a,
            b,
        ))
    }

    pub fn check_window(&self, a: f64, b: f64) -> Result<()> {
        let tol = 1e-12 * (1.0 + self.t_last().abs().max(self.t_first().abs()));
        if a < self.t_first() - tol || b > self.t_last() + tol || b < a {
            return Err(range_err!(
                "time window [{a}, {b}] escapes the recorded slab [{}, {}]",
                self.t_first(),
                self.t_last()
            ));
        }
        Ok(())
    }

    /// Snapshot indices whose times lie in `[a, b]`.
    pub fn snapshots_in(&self, a: f64, b: f64) -> impl Iterator<Item = usize> + '_ {
        self.times
            .iter()
            .enumerate()
            .filter(move |(_, &t)| t >= a && t <= b)
            .map(|(i, _)| i)
    }

    /// Supremum over `[a, b]` of the time-interpolant of per-snapshot values `s`.
    pub fn window_sup(&self, s: &[f64], a: f64, b: f64) -> f64 {
        let mut sup = interp_linear(self.t0, self.spacing, s, a).max(interp_linear(
            self.t0,
            self.spacing,
            s,
            b,
        ));
        for i in self.snapshots_in(a, b) {
            sup = sup.max(s[i]);
        }
        sup
    }
}

/// `sum_j w_j g(v_j)` over sparse weights.
#[inline]
pub fn weighted_sum<F: Fn(f64) -> f64>(weights: &[(usize, f64)], values: &[f64], g: F) -> f64 {
    weights.iter().map(|&(j, w)| w * g(values[j])).sum()
}
