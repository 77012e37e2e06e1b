//! Epsilon-regularity monitors, lattice scans and Campanato exponent fits.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::quantity::ParabolicCylinder;
use super::sampled::SampledHistory;
use crate::dimension::{singular_set_exponent_f64, QuantityId};
use crate::error::{config_err, domain_err, Result};
use crate::quad::log_log_fit;

/// Smallness criteria, each tied to one quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `Phi` (the `(alpha+1)`-th root of the normalized `E_{alpha+1}`).
    FirstStep,
    /// `E`.
    Con2,
    /// `E_{12/7,2}`.
    Impro1,
    /// `D_{inf,1}`.
    Impro2,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::FirstStep,
        Criterion::Con2,
        Criterion::Impro1,
        Criterion::Impro2,
    ];

    pub fn quantity(&self) -> QuantityId {
        match self {
            Criterion::FirstStep => QuantityId::Phi,
            Criterion::Con2 => QuantityId::E,
            Criterion::Impro1 => QuantityId::E127_2,
            Criterion::Impro2 => QuantityId::DInf1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::FirstStep => "firststep",
            Criterion::Con2 => "con2",
            Criterion::Impro1 => "impro1",
            Criterion::Impro2 => "impro2",
        }
    }
}

/// Outcome of a monitor. There is deliberately no "singular" outcome: a
/// large quantity does not imply a singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    RegularIndicated,
    Undetermined,
}

/// Default thresholds, calibrated on resolved smooth runs (see the README).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps01: f64,
    pub eps02: f64,
    pub eps03: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps01: 0.5,
            eps02: 0.5,
            eps03: 1.0,
        }
    }
}

impl Thresholds {
    pub fn for_criterion(&self, c: Criterion) -> f64 {
        match c {
            Criterion::FirstStep => self.eps01,
            Criterion::Con2 => self.eps02,
            Criterion::Impro1 | Criterion::Impro2 => self.eps03,
        }
    }
}

/// Which radii of a ladder count as resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// A radius must span at least this many sample cells.
    pub min_cells: f64,
    /// How many of the smallest resolved radii must be below threshold.
    pub tail: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            min_cells: 2.0,
            tail: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorVerdict {
    pub criterion: Criterion,
    pub x: f64,
    pub t: f64,
    pub threshold: f64,
    pub radii: Vec<f64>,
    /// `NaN` where the cylinder is not resolvable.
    pub values: Vec<f64>,
    pub resolved: Vec<bool>,
    pub verdict: Verdict,
}

fn check_ladder(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(config_err!("radius ladder is empty"));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(config_err!("radii must be positive"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_err!("radius ladder must be strictly decreasing"));
    }
    Ok(())
}

impl SampledHistory {
    /// Whether a cylinder spans enough sample cells and fits the slab.
    pub fn resolvable(&self, cyl: &ParabolicCylinder, res: &Resolution) -> bool {
        let (a, b) = cyl.time_window();
        cyl.r >= res.min_cells * self.dx()
            && 2.0 * cyl.r <= self.length()
            && self.check_window(a, b).is_ok()
    }

    /// Evaluates a criterion along a ladder and decides on the smallest
    /// resolved radii.
    pub fn epsilon_monitor(
        &self,
        x: f64,
        t: f64,
        criterion: Criterion,
        radii: &[f64],
        threshold: f64,
        res: &Resolution,
    ) -> Result<MonitorVerdict> {
        check_ladder(radii)?;
        if !(threshold > 0.0) {
            return Err(config_err!("threshold {threshold} must be positive"));
        }
        let mut values = Vec::with_capacity(radii.len());
        let mut resolved = Vec::with_capacity(radii.len());
        for &r in radii {
            let cyl = ParabolicCylinder::new(x, t, r);
            if self.resolvable(&cyl, res) {
                values.push(self.quantity(&cyl, criterion.quantity())?);
                resolved.push(true);
            } else {
                values.push(f64::NAN);
                resolved.push(false);
            }
        }
        let tail: Vec<f64> = values
            .iter()
            .zip(&resolved)
            .filter(|(_, ok)| **ok)
            .map(|(v, _)| *v)
            .rev()
            .take(res.tail.max(1))
            .collect();
        let verdict = if tail.len() >= res.tail.max(1) && tail.iter().all(|v| *v < threshold) {
            Verdict::RegularIndicated
        } else {
            Verdict::Undetermined
        };
        Ok(MonitorVerdict {
            criterion,
            x,
            t,
            threshold,
            radii: radii.to_vec(),
            values,
            resolved,
            verdict,
        })
    }
}

/// Space-time lattice of monitor centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

impl Lattice {
    /// `nx` equispaced points on `[0, length)` times `nt` points on `[t_lo, t_hi]`.
    pub fn uniform(length: f64, nx: usize, t_lo: f64, t_hi: f64, nt: usize) -> Self {
        let xs = (0..nx).map(|i| length * i as f64 / nx as f64).collect();
        let ts = if nt <= 1 {
            alloc::vec![0.5 * (t_lo + t_hi)]
        } else {
            (0..nt)
                .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (nt - 1) as f64)
                .collect()
        };
        Self { xs, ts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lattice: Lattice,
    pub radii: Vec<f64>,
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub t: f64,
    pub verdicts: Vec<MonitorVerdict>,
    /// Regular if any criterion indicates regularity.
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub undetermined: usize,
    /// Parabolic box-counting slope of the undetermined set, if at least two
    /// box sizes see it. Only an upper-bound proxy on a finite lattice.
    pub box_dimension: Option<f64>,
    /// The Hausdorff-dimension bound `(3 alpha - 5)/(alpha - 1)`.
    pub target_dimension: f64,
    pub note: String,
}

/// Runs one lattice point; exposed so callers can parallelize the scan.
pub fn scan_point(s: &SampledHistory, cfg: &ScanConfig, x: f64, t: f64) -> Result<ScanPoint> {
    let mut verdicts = Vec::with_capacity(cfg.criteria.len());
    for &c in &cfg.criteria {
        verdicts.push(s.epsilon_monitor(
            x,
            t,
            c,
            &cfg.radii,
            cfg.thresholds.for_criterion(c),
            &cfg.resolution,
        )?);
    }
    let verdict = if verdicts
        .iter()
        .any(|v| v.verdict == Verdict::RegularIndicated)
    {
        Verdict::RegularIndicated
    } else {
        Verdict::Undetermined
    };
    Ok(ScanPoint {
        x,
        t,
        verdicts,
        verdict,
    })
}

/// Assembles a report from evaluated points.
pub fn summarize_scan(points: Vec<ScanPoint>, alpha: f64, length: f64) -> ScanReport {
    let bad: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.verdict == Verdict::Undetermined)
        .map(|p| (p.x, p.t))
        .collect();
    ScanReport {
        undetermined: bad.len(),
        box_dimension: box_counting(&bad, length),
        target_dimension: singular_set_exponent_f64(alpha),
        note: "box dimension of undetermined lattice points is an upper-bound proxy; \
               the Hausdorff statement itself is not numerically accessible"
            .into(),
        points,
    }
}

/// Monitors every lattice point sequentially.
pub fn singular_scan(s: &SampledHistory, cfg: &ScanConfig) -> Result<ScanReport> {
    if cfg.criteria.is_empty() {
        return Err(config_err!("scan needs at least one criterion"));
    }
    check_ladder(&cfg.radii)?;
    let mut points = Vec::with_capacity(cfg.lattice.xs.len() * cfg.lattice.ts.len());
    for &t in &cfg.lattice.ts {
        for &x in &cfg.lattice.xs {
            points.push(scan_point(s, cfg, x, t)?);
        }
    }
    Ok(summarize_scan(points, s.alpha(), s.length()))
}

/// Slope of `log N(eps)` against `log(1/eps)` for parabolic boxes
/// `eps x eps^4` covering the given points.
fn box_counting(points: &[(f64, f64)], length: f64) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut sizes = Vec::new();
    let mut counts = Vec::new();
    let mut eps = length / 2.0;
    for _ in 0..12 {
        let mut boxes: Vec<(i64, i64)> = points
            .iter()
            .map(|&(x, t)| ((x / eps).floor() as i64, (t / eps.powi(4)).floor() as i64))
            .collect();
        boxes.sort_unstable();
        boxes.dedup();
        sizes.push(eps);
        counts.push(boxes.len() as f64);
        if boxes.len() == points.len() {
            break;
        }
        eps *= 0.5;
    }
    if sizes.len() < 2 {
        return None;
    }
    let inv: Vec<f64> = sizes.iter().map(|e| 1.0 / e).collect();
    log_log_fit(&inv, &counts).map(|f| f.slope)
}

/// Least-squares Campanato fit `(avg |h - h_Q|^p)^{1/p} ~ M r^nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampanatoFit {
    pub nu_hat: f64,
    pub m_hat: f64,
    pub fit_residual: f64,
    pub radii: Vec<f64>,
    pub averages: Vec<f64>,
}

impl SampledHistory {
    /// Campanato averages along a ladder and their power-law fit. All-zero
    /// averages (up to rounding of the mean) return `nu_hat = +inf`, `m_hat = 0`.
    pub fn campanato_exponent(
        &self,
        x: f64,
        t: f64,
        p: f64,
        radii: &[f64],
    ) -> Result<CampanatoFit> {
        if !(p >= 1.0) {
            return Err(domain_err!("Campanato exponent p = {p} must be at least 1"));
        }
        if radii.len() < 4 {
            return Err(config_err!("a Campanato fit needs at least four radii"));
        }
        check_ladder(radii)?;
        let mut averages = Vec::with_capacity(radii.len());
        let mut level = 0.0f64;
        for &r in radii {
            let cyl = ParabolicCylinder::new(x, t, r);
            let w = super::quantity::window(self, &cyl)?;
            let vol = self.cyl_integral(&w, SampledHistory::h, |_| 1.0);
            let mean = self.cyl_mean(&w);
            level = level.max(mean.abs());
            let osc = self.cyl_integral(&w, SampledHistory::h, |v| (v - mean).abs().powf(p));
            averages.push(if vol > 0.0 {
                (osc / vol).powf(1.0 / p)
            } else {
                0.0
            });
        }
        // oscillations at rounding level of the mean count as none
        let scale = averages.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale <= 1e-13 * level || scale == 0.0 {
            return Ok(CampanatoFit {
                nu_hat: f64::INFINITY,
                m_hat: 0.0,
                fit_residual: 0.0,
                radii: radii.to_vec(),
                averages,
            });
        }
        let (rs, avs): (Vec<f64>, Vec<f64>) = radii
            .iter()
            .zip(averages.iter())
            .filter(|(_, a)| **a > 0.0)
            .map(|(r, a)| (*r, *a))
            .unzip();
        let fit =
            log_log_fit(&rs, &avs).ok_or_else(|| config_err!("degenerate Campanato ladder"))?;
        Ok(CampanatoFit {
            nu_hat: fit.slope,
            m_hat: fit.intercept.exp(),
            fit_residual: fit.residual,
            radii: radii.to_vec(),
            averages,
        })
    }
}
