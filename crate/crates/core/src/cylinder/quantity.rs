//! Dimensionless functionals over parabolic cylinders.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::sampled::{weighted_sum, SampledHistory, DEFAULT_OVERSAMPLE};
use crate::dimension::QuantityId;
use crate::error::{config_err, domain_err, Result};
use crate::sgm::SpaceTimeHistory;
use crate::testfn::smooth_cutoff;

/// `B(x0, r) x (t0 - r^d, t0 + r^d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub x0: f64,
    pub t0: f64,
    pub r: f64,
    pub d: u32,
}

impl ParabolicCylinder {
    /// Cylinder with the fourth-order time scaling.
    pub fn new(x0: f64, t0: f64, r: f64) -> Self {
        Self { x0, t0, r, d: 4 }
    }

    pub fn half_height(&self) -> f64 {
        self.r.powi(self.d as i32)
    }

    pub fn time_window(&self) -> (f64, f64) {
        let h = self.half_height();
        (self.t0 - h, self.t0 + h)
    }

    pub fn with_radius(&self, r: f64) -> Self {
        Self { r, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(config_err!("cylinder radius {} must be positive", self.r));
        }
        if self.d == 0 {
            return Err(config_err!("cylinder time exponent must be positive"));
        }
        Ok(())
    }
}

/// How the mean is taken for mean-subtracted quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeanKind {
    /// Plain average over the cylinder.
    #[default]
    Plain,
    /// Average weighted by a smooth cutoff equal to 1 on `B(theta1 r)`.
    Sigma { theta1: f64 },
}

/// Cutoff choice `sigma` for weighted means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMeanSpec {
    pub theta1: f64,
}

impl WeightedMeanSpec {
    pub fn new(theta1: f64) -> Result<Self> {
        if !(theta1 > 0.0 && theta1 < 1.0) {
            return Err(config_err!("theta1 = {theta1} must lie in (0, 1)"));
        }
        Ok(Self { theta1 })
    }

    pub fn sigma(&self, x: f64, x0: f64, r: f64, length: f64) -> f64 {
        smooth_cutoff(
            crate::spectral::periodic_offset(x, x0, length) / r,
            self.theta1,
        )
    }
}

/// Values of one quantity along a radius ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityReport {
    pub id: QuantityId,
    pub x0: f64,
    pub t0: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub scaling_exponent: f64,
}

/// Window data shared by all quantities of one cylinder.
pub(crate) struct Window {
    pub space: Vec<(usize, f64)>,
    pub time: Vec<(usize, f64)>,
    pub a: f64,
    pub b: f64,
}

pub(crate) fn window(s: &SampledHistory, cyl: &ParabolicCylinder) -> Result<Window> {
    cyl.validate()?;
    let (a, b) = cyl.time_window();
    let time = s.time_weights(a, b)?;
    let space = s.ball_weights(cyl.x0, cyl.r)?;
    Ok(Window { space, time, a, b })
}

impl SampledHistory {
    /// Space-time integral `int int g(h)` of nodal data selected by `field`.
    pub(crate) fn cyl_integral<F: Fn(f64) -> f64>(
        &self,
        w: &Window,
        field: fn(&SampledHistory, usize) -> &[f64],
        g: F,
    ) -> f64 {
        w.time
            .iter()
            .map(|&(i, wt)| wt * weighted_sum(&w.space, field(self, i), &g))
            .sum()
    }

    /// Plain mean of `h` over the cylinder window.
    pub(crate) fn cyl_mean(&self, w: &Window) -> f64 {
        let vol = self.cyl_integral(w, SampledHistory::h, |_| 1.0);
        if vol == 0.0 {
            return 0.0;
        }
        self.cyl_integral(w, SampledHistory::h, |v| v) / vol
    }

    /// `h_{B(r),sigma}` at snapshot `i`.
    pub fn ball_mean_sigma(
        &self,
        i: usize,
        x0: f64,
        r: f64,
        spec: WeightedMeanSpec,
    ) -> Result<f64> {
        let space = self.ball_weights(x0, r)?;
        let dx = self.dx();
        let (mut num, mut den) = (0.0, 0.0);
        for &(j, w) in &space {
            let sg = spec.sigma(j as f64 * dx, x0, r, self.length());
            num += w * sg * self.h(i)[j];
            den += w * sg;
        }
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }

    /// `h_{Q(r),sigma}`.
    pub fn cylinder_mean_sigma(
        &self,
        cyl: &ParabolicCylinder,
        spec: WeightedMeanSpec,
    ) -> Result<f64> {
        let w = window(self, cyl)?;
        let dx = self.dx();
        let (mut num, mut den) = (0.0, 0.0);
        for &(i, wt) in &w.time {
            for &(j, ws) in &w.space {
                let sg = spec.sigma(j as f64 * dx, cyl.x0, cyl.r, self.length());
                num += wt * ws * sg * self.h(i)[j];
                den += wt * ws * sg;
            }
        }
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }

    /// Un-normalized integral part of a quantity (before the power of `r`).
    pub fn raw_quantity(
        &self,
        cyl: &ParabolicCylinder,
        id: QuantityId,
        mean: MeanKind,
    ) -> Result<f64> {
        if let Some(p) = id.p() {
            if !(p >= 1.0) {
                return Err(domain_err!(
                    "integrability exponent p = {p} must be at least 1"
                ));
            }
        }
        let w = window(self, cyl)?;
        let alpha = self.alpha();
        let per_snapshot =
            |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..self.times().len()).map(f).collect() };
        Ok(match id {
            QuantityId::E => self.cyl_integral(&w, SampledHistory::hyy, |v| v * v),
            QuantityId::EStar => {
                let s = per_snapshot(&|i| weighted_sum(&w.space, self.h(i), |v| v * v));
                self.window_sup(&s, w.a, w.b)
            }
            QuantityId::EStarTilde => {
                let len: f64 = w.space.iter().map(|x| x.1).sum();
                let s = per_snapshot(&|i| {
                    let m = weighted_sum(&w.space, self.h(i), |v| v) / len;
                    weighted_sum(&w.space, self.h(i), |v| (v - m) * (v - m))
                });
                self.window_sup(&s, w.a, w.b)
            }
            QuantityId::Dp(p) => self.cyl_integral(&w, SampledHistory::h, |v| v.abs().powf(p)),
            QuantityId::DpTilde(p) => {
                let m = match mean {
                    MeanKind::Plain => self.cyl_mean(&w),
                    MeanKind::Sigma { theta1 } => {
                        self.cylinder_mean_sigma(cyl, WeightedMeanSpec::new(theta1)?)?
                    }
                };
                self.cyl_integral(&w, SampledHistory::h, |v| (v - m).abs().powf(p))
            }
            QuantityId::EAlpha1 | QuantityId::Phi => {
                self.cyl_integral(&w, SampledHistory::hy, |v| v.abs().powf(alpha + 1.0))
            }
            QuantityId::E127_2 => w
                .time
                .iter()
                .map(|&(i, wt)| wt * weighted_sum(&w.space, self.hyy(i), |v| v * v).powf(6.0 / 7.0))
                .sum(),
            QuantityId::DInf1 => {
                let s = per_snapshot(&|i| weighted_sum(&w.space, self.h(i), |v| v.abs()));
                self.window_sup(&s, w.a, w.b)
            }
        })
    }

    /// Dimensionless value of a quantity on a cylinder.
    pub fn quantity(&self, cyl: &ParabolicCylinder, id: QuantityId) -> Result<f64> {
        self.quantity_with_mean(cyl, id, MeanKind::Plain)
    }

    pub fn quantity_with_mean(
        &self,
        cyl: &ParabolicCylinder,
        id: QuantityId,
        mean: MeanKind,
    ) -> Result<f64> {
        let raw = self.raw_quantity(cyl, id, mean)?;
        let v = raw / cyl.r.powf(id.exponent(self.alpha()));
        Ok(match id {
            QuantityId::Phi => v.max(0.0).powf(1.0 / (self.alpha() + 1.0)),
            _ => v,
        })
    }

    /// One quantity along a ladder of radii around a common center.
    pub fn report(
        &self,
        x0: f64,
        t0: f64,
        radii: &[f64],
        id: QuantityId,
    ) -> Result<QuantityReport> {
        let mut values = Vec::with_capacity(radii.len());
        for &r in radii {
            values.push(self.quantity(&ParabolicCylinder::new(x0, t0, r), id)?);
        }
        Ok(QuantityReport {
            id,
            x0,
            t0,
            radii: radii.to_vec(),
            values,
            scaling_exponent: id.exponent(self.alpha()),
        })
    }
}

/// Evaluates a quantity directly from a history (samples it first; reuse a
/// [`SampledHistory`] when evaluating many cylinders).
pub fn cylinder_quantity(
    hist: &SpaceTimeHistory,
    cyl: &ParabolicCylinder,
    id: QuantityId,
) -> Result<f64> {
    SampledHistory::new(hist, DEFAULT_OVERSAMPLE)?.quantity(cyl, id)
}
