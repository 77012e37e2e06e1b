//! Unit-constant checks of the parabolic Poincare, interpolation and
//! biharmonic smoothing inequalities, plus the nonlinear cancellation.
//!
//! Constants in these inequalities are not explicit, so every check reports
//! `lhs / rhs_unit` with all constants set to one. Suites estimate a constant
//! as the maximum ratio and pass when that maximum is finite and stable
//! under refinement.

mod cancellation;
mod slab;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cancellation::{cancellation_scale, check_cancellation, derivative_zeros};

use crate::cylinder::{ParabolicCylinder, WeightedMeanSpec};
use crate::error::{config_err, domain_err, precondition_err, unsupported_err, Result};
use crate::sgm::{HistoryOrigin, SpaceTimeHistory};
use crate::spectral::SpectralField1D;
use slab::{Component, Placement, WindowData};

/// Which interpolation inequality to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// `||h_y||_{L^{alpha+1}}` against `||h||_{L^inf L^2}` and `||h_yy||_{L^2}` on a full period.
    Inter1,
    /// `||h_y||_{L^3}` against `||h||_{L^inf L^1}` and `||h_yy||_{L^2}`.
    Inter2,
    /// `||h||_{L^3}` against `||h||_{L^inf L^1}` and `||h_yy||_{L^2}`.
    Inter3,
}

impl Interpolation {
    pub const ALL: [Interpolation; 3] = [
        Interpolation::Inter1,
        Interpolation::Inter2,
        Interpolation::Inter3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Interpolation::Inter1 => "inter1",
            Interpolation::Inter2 => "inter2",
            Interpolation::Inter3 => "inter3",
        }
    }
}

/// A named intermediate value of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub check: String,
    pub lhs: f64,
    /// Right side with every constant set to one.
    pub rhs_unit: f64,
    /// `lhs / rhs_unit`; zero when both vanish, infinite when only the right side does.
    pub ratio: f64,
    pub terms: Vec<Term>,
    /// SHA-256 of the history coefficients, times and check parameters.
    pub inputs_digest: String,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn term(name: &str, value: f64) -> Term {
    Term {
        name: name.into(),
        value,
    }
}

/// Hex SHA-256 over a history and the scalar parameters of a check.
pub fn inputs_digest(hist: &SpaceTimeHistory, check: &str, params: &[f64]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(check.as_bytes());
    for p in params {
        hasher.update(p.to_le_bytes());
    }
    hasher.update(hist.alpha().to_le_bytes());
    hasher.update((hist.grid().n as u64).to_le_bytes());
    hasher.update(hist.grid().length.to_le_bytes());
    for (t, s) in hist.times().iter().zip(hist.snapshots()) {
        hasher.update(t.to_le_bytes());
        for c in s.coeffs() {
            hasher.update(c.re.to_le_bytes());
            hasher.update(c.im.to_le_bytes());
        }
    }
    let mut out = String::with_capacity(64);
    for b in hasher.finalize().iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn verdict(check: &str, lhs: f64, rhs: f64, terms: Vec<Term>, digest: String) -> InequalityVerdict {
    InequalityVerdict {
        check: check.into(),
        lhs,
        rhs_unit: rhs,
        ratio: ratio(lhs, rhs),
        terms,
        inputs_digest: digest,
    }
}

/// Parabolic Poincare inequality on `Q(theta1 r)` inside `Q(r)`:
/// `||h - h_Q||_p^p <= C (r^p ||h_y||_p^p + r^{5+2p-5 alpha} ||h_y||_p^{p alpha} + r^{5-p} ||f||_1^p)`.
///
/// Also reports the intermediate bound on `|h_{B(r),sigma}(tau) - h_{Q(r),sigma}|`
/// (`keypoin_*` terms), maximized over the window.
pub fn check_poincare(
    hist: &SpaceTimeHistory,
    cyl: &ParabolicCylinder,
    theta1: f64,
    p: f64,
) -> Result<InequalityVerdict> {
    match hist.origin() {
        HistoryOrigin::Solver { linear_only: false } => {}
        other => {
            return Err(precondition_err!(
                "the Poincare inequality is stated for solutions; history origin is {other:?}"
            ))
        }
    }
    if !(p >= 1.0) {
        return Err(domain_err!("exponent p = {p} must be at least 1"));
    }
    let spec = WeightedMeanSpec::new(theta1)?;
    let r = cyl.r;
    let alpha = hist.alpha();
    let (a, b) = cyl.time_window();
    let outer = WindowData::new(hist, cyl.x0, r, a, b, Placement::Quadrature, true)?;
    let inner_cyl = cyl.with_radius(theta1 * r);
    let (ia, ib) = inner_cyl.time_window();
    let inner = WindowData::new(
        hist,
        cyl.x0,
        inner_cyl.r,
        ia,
        ib,
        Placement::Quadrature,
        false,
    )?;

    let vol = inner.integral(|_| 1.0);
    let mean = inner.integral(|j| j[0]) / vol;
    let mut lhs = inner.abs_power_integral(Component::H, mean, p);
    // a constant field leaves only the rounding error of its mean
    if lhs <= vol * (1e-14 * mean.abs()).powf(p) {
        lhs = 0.0;
    }

    let hy_p = outer.abs_power_integral(Component::Hy, 0.0, p);
    let f_l1 = outer.forcing_l1();
    let t1 = r.powf(p) * hy_p;
    let t2 = r.powf(5.0 + 2.0 * p - 5.0 * alpha) * hy_p.powf(alpha);
    let t3 = r.powf(5.0 - p) * f_l1.powf(p);
    let rhs = t1 + t2 + t3;

    // weighted means for the intermediate estimate
    let length = hist.grid().length;
    let sig: Vec<f64> = outer
        .rule
        .xs
        .iter()
        .map(|&x| spec.sigma(x, cyl.x0, r, length))
        .collect();
    let sig_mass: f64 = sig.iter().zip(&outer.rule.ws).map(|(s, w)| s * w).sum();
    let ball_means: Vec<f64> = outer
        .jets
        .iter()
        .map(|jet| {
            jet.iter()
                .zip(&sig)
                .zip(&outer.rule.ws)
                .map(|((j, s), w)| j[0] * s * w)
                .sum::<f64>()
                / sig_mass
        })
        .collect();
    let q_mean =
        outer.time_integral(&ball_means) / outer.time_integral(&alloc::vec![1.0; ball_means.len()]);
    let dev: Vec<f64> = ball_means.iter().map(|m| (m - q_mean).abs()).collect();
    let k_lhs = outer.sup_in_time(&dev);
    let hy_1 = outer.abs_power_integral(Component::Hy, 0.0, 1.0);
    let hy_a = outer.abs_power_integral(Component::Hy, 0.0, alpha);
    let k_rhs = r.powi(-4) * hy_1 + r.powi(-3) * hy_a + f_l1 / r;

    let terms = alloc::vec![
        term("hy_lp_p", hy_p),
        term("f_l1", f_l1),
        term("rhs_gradient", t1),
        term("rhs_nonlinear", t2),
        term("rhs_forcing", t3),
        term("keypoin_lhs", k_lhs),
        term("keypoin_rhs_unit", k_rhs),
        term("keypoin_ratio", ratio(k_lhs, k_rhs)),
    ];
    let digest = inputs_digest(hist, "poincare", &[cyl.x0, cyl.t0, r, theta1, p]);
    Ok(verdict("poincare", lhs, rhs, terms, digest))
}

/// Space-time window `B(x0, r) x [t_lo, t_hi]` for the interpolation checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabWindow {
    pub x0: f64,
    pub r: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl From<ParabolicCylinder> for SlabWindow {
    fn from(c: ParabolicCylinder) -> Self {
        let (t_lo, t_hi) = c.time_window();
        Self {
            x0: c.x0,
            r: c.r,
            t_lo,
            t_hi,
        }
    }
}

impl SlabWindow {
    /// The whole period over `[t_lo, t_hi]`.
    pub fn full_period(length: f64, t_lo: f64, t_hi: f64) -> Self {
        Self {
            x0: 0.5 * length,
            r: 0.5 * length,
            t_lo,
            t_hi,
        }
    }
}

/// Relative size of `int h_y` on the full period allowed by `inter1`.
pub const MEAN_DERIVATIVE_TOL: f64 = 1e-13;

/// One of the interpolation inequalities with unit constants.
pub fn check_interpolation(
    hist: &SpaceTimeHistory,
    window: &SlabWindow,
    which: Interpolation,
) -> Result<InequalityVerdict> {
    if !(window.t_hi > window.t_lo) {
        return Err(config_err!(
            "empty time window [{}, {}]",
            window.t_lo,
            window.t_hi
        ));
    }
    let length = hist.grid().length;
    let r = window.r;
    if which == Interpolation::Inter1 && (2.0 * r - length).abs() > 1e-12 * length {
        return Err(unsupported_err!(
            "inter1 assumes a field periodic on the ball, so only full-period windows are evaluated (r = {r}, period {length})"
        ));
    }
    let data = WindowData::new(
        hist,
        window.x0,
        r,
        window.t_lo,
        window.t_hi,
        Placement::Quadrature,
        false,
    )?;
    let l1 = data.abs_power(Component::H, 0.0, 1.0);
    let a_norm = data.sup_in_time(&l1);
    let b_norm = data.integral(|j| j[2] * j[2]).sqrt();
    let mut terms = alloc::vec![term("h_linf_l1", a_norm), term("hyy_l2", b_norm)];
    let (lhs, rhs) = match which {
        Interpolation::Inter2 => {
            let lhs = data.abs_power_integral(Component::Hy, 0.0, 3.0).cbrt();
            (
                lhs,
                a_norm.cbrt() * b_norm.powf(2.0 / 3.0) + r.powf(-1.0 / 3.0) * a_norm,
            )
        }
        Interpolation::Inter3 => {
            let lhs = data.abs_power_integral(Component::H, 0.0, 3.0).cbrt();
            (
                lhs,
                r.powf(0.8) * a_norm.powf(11.0 / 15.0) * b_norm.powf(4.0 / 15.0)
                    + r.powf(2.0 / 3.0) * a_norm,
            )
        }
        Interpolation::Inter1 => {
            let alpha = hist.alpha();
            let defect = mean_derivative_defect(hist, &data);
            if defect > MEAN_DERIVATIVE_TOL {
                return Err(precondition_err!(
                    "int h_y over the period is {defect:e} relative to ||h_y||_1"
                ));
            }
            terms.push(term("mean_hy_defect", defect));
            let l2 = data.per_time(|j| j[0] * j[0]);
            let s_norm = data.sup_in_time(&l2).sqrt();
            terms.push(term("h_linf_l2", s_norm));
            let lhs = data
                .abs_power_integral(Component::Hy, 0.0, alpha + 1.0)
                .powf(1.0 / (alpha + 1.0));
            let rhs = r.powf((7.0 - 3.0 * alpha) / (2.0 * (alpha + 1.0)))
                * s_norm.powf((alpha + 3.0) / (4.0 * (alpha + 1.0)))
                * b_norm.powf((3.0 * alpha + 1.0) / (4.0 * (alpha + 1.0)));
            (lhs, rhs)
        }
    };
    let digest = inputs_digest(
        hist,
        which.name(),
        &[window.x0, r, window.t_lo, window.t_hi],
    );
    Ok(verdict(which.name(), lhs, rhs, terms, digest))
}

/// Largest `|int h_y| / int |h_y|` over the covered snapshots.
fn mean_derivative_defect(hist: &SpaceTimeHistory, data: &WindowData) -> f64 {
    let mut worst = 0.0f64;
    for &i in &data.snaps {
        let s = &hist.snapshots()[i];
        let m = 8 * s.grid().n;
        let hy = s.derivative(1).sample(m);
        let sum: f64 = hy.iter().sum();
        let mass: f64 = hy.iter().map(|v| v.abs()).sum();
        if mass > 0.0 {
            worst = worst.max(sum.abs() / mass);
        }
    }
    worst
}

/// Interpolation check for a single field, held constant over the window.
pub fn check_interpolation_field(
    h: &SpectralField1D,
    alpha: f64,
    window: &SlabWindow,
    which: Interpolation,
) -> Result<InequalityVerdict> {
    let hist = SpaceTimeHistory::frozen(h, alpha, window.t_lo, window.t_hi, 2)?;
    check_interpolation(&hist, window, which)
}

/// Interior gradient bound for the biharmonic heat equation:
/// `||H_x||_{L^inf(Q(theta2 rho))} <= C (||H||_{L^2(Q(rho))} + ||H_x||_{L^2(Q(rho))})`.
pub fn check_biharmonic_smoothing(
    hist: &SpaceTimeHistory,
    cyl: &ParabolicCylinder,
    theta2: f64,
) -> Result<InequalityVerdict> {
    if hist.origin() != (HistoryOrigin::Solver { linear_only: true }) || !hist.forcing().is_zero() {
        return Err(precondition_err!(
            "biharmonic smoothing needs an unforced linear-only solver history"
        ));
    }
    if !(theta2 > 0.0 && theta2 < 1.0) {
        return Err(config_err!("theta2 = {theta2} must lie in (0, 1)"));
    }
    let (a, b) = cyl.time_window();
    let outer = WindowData::new(hist, cyl.x0, cyl.r, a, b, Placement::Quadrature, false)?;
    let inner_cyl = cyl.with_radius(theta2 * cyl.r);
    let (ia, ib) = inner_cyl.time_window();
    let inner = WindowData::new(
        hist,
        cyl.x0,
        inner_cyl.r,
        ia,
        ib,
        Placement::Sampling,
        false,
    )?;
    let lhs = inner.sup_pointwise(|j| j[1].abs());
    let h_l2 = outer.integral(|j| j[0] * j[0]).sqrt();
    let hx_l2 = outer.integral(|j| j[1] * j[1]).sqrt();
    let terms = alloc::vec![term("h_l2", h_l2), term("hx_l2", hx_l2)];
    let digest = inputs_digest(hist, "biharmonic", &[cyl.x0, cyl.t0, cyl.r, theta2]);
    Ok(verdict("biharmonic", lhs, h_l2 + hx_l2, terms, digest))
}

/// Suite reduction: the largest finite ratio and how many were infinite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub count: usize,
    pub max_ratio: f64,
    pub infinite: usize,
}

impl SuiteSummary {
    pub fn add(&mut self, v: &InequalityVerdict) {
        self.count += 1;
        if v.ratio.is_finite() {
            self.max_ratio = self.max_ratio.max(v.ratio);
        } else {
            self.infinite += 1;
        }
    }

    pub fn merge(mut self, other: SuiteSummary) -> SuiteSummary {
        self.count += other.count;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self.infinite += other.infinite;
        self
    }
}
