//! Scale-invariant cylinder quantities for the 3D system, on one-sided
//! windows `B(x0, r) x (t0 - r^2, t0)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::field::{wavevector, PressureField3D, VelocityField3D, BOX_LENGTH, ZERO};
use super::solver::{MnsHistory, MnsTrace};
use crate::dimension::{mns_exponent, MnsQuantityKind};
use crate::error::{config_err, domain_err, range_err, Result};
use crate::quad::{interp_linear, interval_hat_weights, periodic_hat_weights};
use crate::spectral::{index_of_mode, periodic_offset};

/// Default sampling refinement per axis.
pub const MNS_OVERSAMPLE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "p", rename_all = "snake_case")]
pub enum MnsQuantityId {
    /// `r^{-(5 alpha - 5 - p)/(alpha - 1)} int int |u|^p`.
    Ep(f64),
    /// `r^{-(4 alpha - 6)/(alpha - 1)} int int |Pi|^{(alpha+1)/alpha}`.
    Pressure,
    /// `r^{-(5 - 3 alpha)/(1 - alpha)} int int |grad u|^2`.
    Gradient,
    /// `r^{-(5 - 3 alpha)/(1 - alpha)} sup_t int |u|^2`.
    EStar,
}

impl MnsQuantityId {
    pub fn kind(&self) -> MnsQuantityKind {
        match self {
            MnsQuantityId::Ep(_) => MnsQuantityKind::Ep,
            MnsQuantityId::Pressure => MnsQuantityKind::Pressure,
            MnsQuantityId::Gradient => MnsQuantityKind::Gradient,
            MnsQuantityId::EStar => MnsQuantityKind::EStar,
        }
    }

    pub fn exponent(&self, alpha: f64) -> f64 {
        let p = match self {
            MnsQuantityId::Ep(p) => *p,
            _ => 0.0,
        };
        mns_exponent(self.kind(), alpha, p)
    }

    pub fn label(&self) -> alloc::string::String {
        match self {
            MnsQuantityId::Ep(p) => alloc::format!("E_p({p})"),
            MnsQuantityId::Pressure => "P".into(),
            MnsQuantityId::Gradient => "E_grad".into(),
            MnsQuantityId::EStar => "E_star".into(),
        }
    }

    pub fn all(p: f64) -> [MnsQuantityId; 4] {
        [
            MnsQuantityId::Ep(p),
            MnsQuantityId::Pressure,
            MnsQuantityId::Gradient,
            MnsQuantityId::EStar,
        ]
    }
}

/// One-sided cylinder `B(x0, r) x (t0 - r^2, t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MnsCylinder {
    pub x0: [f64; 3],
    pub t0: f64,
    pub r: f64,
}

impl MnsCylinder {
    pub fn new(x0: [f64; 3], t0: f64, r: f64) -> Self {
        Self { x0, t0, r }
    }

    pub fn time_window(&self) -> (f64, f64) {
        (self.t0 - self.r * self.r, self.t0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnsQuantityReport {
    pub id: MnsQuantityId,
    pub x0: [f64; 3],
    pub t0: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub scaling_exponent: f64,
    /// Time exponent of the cylinder.
    pub d: u32,
}

/// Ball weights on an `m^3` grid: columns in `(x, y)` carry cell area and
/// exact piecewise-linear chord weights in `z`.
fn ball_weights(m: usize, x0: [f64; 3], r: f64) -> Result<Vec<(usize, f64)>> {
    if !(r > 0.0) || 2.0 * r > BOX_LENGTH {
        return Err(range_err!("ball radius {r} does not fit the periodic box"));
    }
    let h = BOX_LENGTH / m as f64;
    let mut out = Vec::new();
    for ix in 0..m {
        let dx = periodic_offset(ix as f64 * h, x0[0], BOX_LENGTH);
        if dx.abs() >= r {
            continue;
        }
        for iy in 0..m {
            let dy = periodic_offset(iy as f64 * h, x0[1], BOX_LENGTH);
            let rho2 = dx * dx + dy * dy;
            if rho2 >= r * r {
                continue;
            }
            let c = (r * r - rho2).sqrt();
            for (iz, w) in periodic_hat_weights(m, h, x0[2] - c, x0[2] + c) {
                out.push(((ix * m + iy) * m + iz, w * h * h));
            }
        }
    }
    Ok(out)
}

fn check_time(hist: &MnsHistory, a: f64, b: f64) -> Result<()> {
    let (lo, hi) = (hist.times[0], hist.times[hist.times.len() - 1]);
    let tol = 1e-9 * hist.spacing().max(1e-300);
    if a < lo - tol || b > hi + tol {
        return Err(range_err!(
            "window [{a}, {b}] escapes the recorded slab [{lo}, {hi}]"
        ));
    }
    Ok(())
}

fn per_snapshot<F: Fn(usize) -> Result<f64>>(idx: &[usize], len: usize, f: F) -> Result<Vec<f64>> {
    let mut out = vec![0.0; len];
    for &i in idx {
        out[i] = f(i)?;
    }
    Ok(out)
}

/// Value of a quantity on one cylinder, sampling fields on `oversample * n` points per axis.
pub fn mns_quantity(
    hist: &MnsHistory,
    cyl: &MnsCylinder,
    id: MnsQuantityId,
    oversample: usize,
) -> Result<f64> {
    if oversample == 0 {
        return Err(config_err!("oversample must be positive"));
    }
    if let MnsQuantityId::Ep(p) = id {
        if !(p >= 1.0) {
            return Err(domain_err!(
                "integrability exponent p = {p} must be at least 1"
            ));
        }
    }
    let (a, b) = cyl.time_window();
    check_time(hist, a, b)?;
    let m = oversample * hist.side();
    let space = ball_weights(m, cyl.x0, cyl.r)?;
    let count = hist.times.len();
    let tw = if count == 1 {
        vec![(0, 0.0)]
    } else {
        interval_hat_weights(count, hist.times[0], hist.spacing(), a, b)
    };
    let alpha = hist.alpha;
    let ball =
        |vals: &dyn Fn(usize) -> f64| -> f64 { space.iter().map(|&(j, w)| w * vals(j)).sum() };
    let raw = match id {
        MnsQuantityId::Ep(p) => {
            let idx: Vec<usize> = tw.iter().map(|x| x.0).collect();
            let s = per_snapshot(&idx, count, |i| {
                let u = hist.velocity[i].samples(m)?;
                Ok(ball(&|j| {
                    (u[0][j] * u[0][j] + u[1][j] * u[1][j] + u[2][j] * u[2][j])
                        .sqrt()
                        .powf(p)
                }))
            })?;
            tw.iter().map(|&(i, w)| w * s[i]).sum()
        }
        MnsQuantityId::Pressure => {
            let q = (alpha + 1.0) / alpha;
            let idx: Vec<usize> = tw.iter().map(|x| x.0).collect();
            let s = per_snapshot(&idx, count, |i| {
                let pr = hist.pressure[i].samples(m)?;
                Ok(ball(&|j| pr[j].abs().powf(q)))
            })?;
            tw.iter().map(|&(i, w)| w * s[i]).sum()
        }
        MnsQuantityId::Gradient => {
            let idx: Vec<usize> = tw.iter().map(|x| x.0).collect();
            let s = per_snapshot(&idx, count, |i| {
                let g = hist.velocity[i].gradient_samples(m)?;
                Ok(ball(&|j| {
                    g.iter()
                        .flat_map(|row| row.iter())
                        .map(|c| c[j] * c[j])
                        .sum()
                }))
            })?;
            tw.iter().map(|&(i, w)| w * s[i]).sum()
        }
        MnsQuantityId::EStar => {
            // in-window snapshots plus the neighbours needed to interpolate the ends
            let dt = hist.spacing();
            let t0 = hist.times[0];
            let lo = if dt > 0.0 {
                ((a - t0) / dt).floor().max(0.0) as usize
            } else {
                0
            };
            let hi = if dt > 0.0 {
                (((b - t0) / dt).ceil() as usize).min(count - 1)
            } else {
                0
            };
            let idx: Vec<usize> = (lo..=hi).collect();
            let s = per_snapshot(&idx, count, |i| {
                let u = hist.velocity[i].samples(m)?;
                Ok(ball(&|j| {
                    u[0][j] * u[0][j] + u[1][j] * u[1][j] + u[2][j] * u[2][j]
                }))
            })?;
            let mut best = interp_linear(t0, dt, &s, a).max(interp_linear(t0, dt, &s, b));
            for &i in &idx {
                if hist.times[i] >= a && hist.times[i] <= b {
                    best = best.max(s[i]);
                }
            }
            best
        }
    };
    Ok(raw / cyl.r.powf(id.exponent(alpha)))
}

/// One quantity along a ladder of radii.
pub fn mns_quantities(
    hist: &MnsHistory,
    x0: [f64; 3],
    t0: f64,
    radii: &[f64],
    id: MnsQuantityId,
) -> Result<MnsQuantityReport> {
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        values.push(mns_quantity(
            hist,
            &MnsCylinder::new(x0, t0, r),
            id,
            MNS_OVERSAMPLE,
        )?);
    }
    Ok(MnsQuantityReport {
        id,
        x0,
        t0,
        radii: radii.to_vec(),
        values,
        scaling_exponent: id.exponent(hist.alpha),
        d: 2,
    })
}

fn reindex(src: &[Complex64], n: usize, lambda: usize, factor: f64) -> Vec<Complex64> {
    let nn = n * lambda;
    let mut out = vec![ZERO; nn * nn * nn];
    for (idx, c) in src.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        let k = wavevector(idx, n);
        let map = |k: f64| {
            index_of_mode(k as i64 * lambda as i64, nn).expect("scaled modes stay inside the band")
        };
        out[(map(k[0]) * nn + map(k[1])) * nn + map(k[2])] = c * factor;
    }
    out
}

/// `u_lambda = lambda^{1/(alpha-1)} u(lambda x, lambda^2 t)` and
/// `Pi_lambda = lambda^{alpha/(alpha-1)} Pi(lambda x, lambda^2 t)` on the same
/// box with `lambda n` modes per axis (`lambda` a power of two).
pub fn mns_scaling_transform(hist: &MnsHistory, lambda: usize) -> Result<MnsHistory> {
    if lambda == 0 || !lambda.is_power_of_two() {
        return Err(config_err!("lambda = {lambda} must be a power of two"));
    }
    let n = hist.side();
    super::field::check_side(n * lambda)?;
    let l = lambda as f64;
    let alpha = hist.alpha;
    let fu = l.powf(1.0 / (alpha - 1.0));
    let fp = l.powf(alpha / (alpha - 1.0));
    let velocity = hist
        .velocity
        .iter()
        .map(|u| {
            let c = u.components();
            VelocityField3D::from_parts_unchecked(
                n * lambda,
                [
                    reindex(&c[0], n, lambda, fu),
                    reindex(&c[1], n, lambda, fu),
                    reindex(&c[2], n, lambda, fu),
                ],
            )
        })
        .collect();
    let pressure = hist
        .pressure
        .iter()
        .map(|p| PressureField3D::from_coeffs(n * lambda, reindex(p.coeffs(), n, lambda, fp)))
        .collect::<Result<Vec<_>>>()?;
    let t_scale = 1.0 / (l * l);
    let e_factor = fu * fu;
    let d_factor = fu * fu * l * l;
    Ok(MnsHistory {
        alpha,
        times: hist.times.iter().map(|t| t * t_scale).collect(),
        velocity,
        pressure,
        trace: MnsTrace {
            t0: hist.trace.t0 * t_scale,
            dt: hist.trace.dt * t_scale,
            energy: hist.trace.energy.iter().map(|e| e * e_factor).collect(),
            dissipation: hist
                .trace
                .dissipation
                .iter()
                .map(|d| d * d_factor)
                .collect(),
        },
        max_divergence_defect: hist.max_divergence_defect,
    })
}
