//! Observational monitor for the scaling-critical family
//! `2/p + 3/q = 1/(alpha - 1)`, `q > 3 alpha - 3`.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::field::{padded_side, BOX_LENGTH};
use super::solver::MnsHistory;
use crate::error::{config_err, Result};
use crate::quad::trapezoid_uniform;

/// Time exponent paired with `q` on the ladder, if `q` is admissible.
pub fn serrin_p_for(q: f64, alpha: f64) -> Option<f64> {
    if !(alpha > 1.0) || !(q > 3.0 * alpha - 3.0) {
        return None;
    }
    Some(2.0 / (1.0 / (alpha - 1.0) - 3.0 / q))
}

/// Checks that `(p, q)` lies on the ladder for `alpha`.
pub fn check_ladder(p: f64, q: f64, alpha: f64) -> Result<()> {
    let admissible = || {
        alloc::format!(
            "admissible pairs: q > {:.6} with p = 2 / (1/(alpha-1) - 3/q)",
            3.0 * alpha - 3.0
        )
    };
    match serrin_p_for(q, alpha) {
        Some(pp) if (pp - p).abs() <= 1e-9 * pp.max(1.0) => Ok(()),
        Some(pp) => Err(config_err!(
            "(p, q) = ({p}, {q}) is off the ladder for alpha = {alpha} (q = {q} needs p = {pp}); {}",
            admissible()
        )),
        None => Err(config_err!("q = {q} is not admissible for alpha = {alpha}; {}", admissible())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerrinReport {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub times: Vec<f64>,
    /// `||u(t)||_{L^q}` per snapshot.
    pub lq_norms: Vec<f64>,
    /// `(int_0^t ||u||_q^p)^{1/p}` per snapshot (trapezoid).
    pub running_lp: Vec<f64>,
    pub bounded: bool,
    /// Whether `||u||_{L^q}` never increased between snapshots.
    pub decreasing: bool,
}

/// Spatial `L^q` norm of `|u|` on the padded grid.
pub fn lq_norm(u: &super::field::VelocityField3D, q: f64) -> Result<f64> {
    let m = padded_side(u.side());
    let s = u.samples(m)?;
    let cell = (BOX_LENGTH / m as f64).powi(3);
    let sum: f64 = (0..m * m * m)
        .map(|j| {
            (s[0][j] * s[0][j] + s[1][j] * s[1][j] + s[2][j] * s[2][j])
                .sqrt()
                .powf(q)
        })
        .sum();
    Ok((sum * cell).powf(1.0 / q))
}

/// Monitors `||u||_{L^q}` and the running `L^p` time norm over a run.
pub fn serrin_monitor(hist: &MnsHistory, p: f64, q: f64, alpha: f64) -> Result<SerrinReport> {
    check_ladder(p, q, alpha)?;
    let mut lq = Vec::with_capacity(hist.len());
    for u in &hist.velocity {
        lq.push(lq_norm(u, q)?);
    }
    let powered: Vec<f64> = lq.iter().map(|v| v.powf(p)).collect();
    let dt = hist.spacing();
    let running: Vec<f64> = (0..lq.len())
        .map(|i| trapezoid_uniform(dt, &powered[..=i]).powf(1.0 / p))
        .collect();
    let bounded = lq.iter().chain(running.iter()).all(|v| v.is_finite());
    let decreasing = lq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    Ok(SerrinReport {
        p,
        q,
        alpha,
        times: hist.times.clone(),
        lq_norms: lq,
        running_lp: running,
        bounded,
        decreasing,
    })
}
