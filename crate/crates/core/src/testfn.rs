//! Smooth compactly supported space-time test functions.

use serde::{Deserialize, Serialize};

use crate::spectral::periodic_offset;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

/// Truncated Taylor series `sum c_k s^k`, `k <= 4`.
type Jet = [f64; 5];

fn jet_recip(a: &Jet) -> Jet {
    let mut b = [0.0; 5];
    b[0] = 1.0 / a[0];
    for k in 1..5 {
        let mut s = 0.0;
        for j in 1..=k {
            s += a[j] * b[k - j];
        }
        b[k] = -s * b[0];
    }
    b
}

fn jet_exp(a: &Jet) -> Jet {
    let mut e = [0.0; 5];
    e[0] = a[0].exp();
    for k in 1..5 {
        let mut s = 0.0;
        for j in 1..=k {
            s += j as f64 * a[j] * e[k - j];
        }
        e[k] = s / k as f64;
    }
    e
}

/// Derivatives of order 0..=4 of `exp(-1/(1 - s^2))` (zero for `|s| >= 1`).
pub fn bump_derivatives(s: f64) -> [f64; 5] {
    let v = 1.0 - s * s;
    if v <= 1e-3 {
        // exp(-1000) underflows anyway
        return [0.0; 5];
    }
    let r = jet_recip(&[v, -2.0 * s, -1.0, 0.0, 0.0]);
    let e = jet_exp(&[-r[0], -r[1], -r[2], -r[3], -r[4]]);
    [e[0], e[1], 2.0 * e[2], 6.0 * e[3], 24.0 * e[4]]
}

/// Values of a test function and the derivatives that the weak form and
/// the local energy balance need.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhiJet {
    pub phi: f64,
    pub phi_t: f64,
    pub phi_x: f64,
    pub phi_xx: f64,
    pub phi_xxx: f64,
    pub phi_xxxx: f64,
}

/// `phi(x, t) = amplitude * b((x - xc)/wx) * b((t - tc)/wt)` with `b` the
/// standard `exp(-1/(1-s^2))` bump; `x - xc` is wrapped to the nearest
/// periodic image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Zero,
    Bump {
        x_center: f64,
        x_halfwidth: f64,
        t_center: f64,
        t_halfwidth: f64,
        amplitude: f64,
    },
}

impl TestFunction {
    pub fn bump(x_center: f64, x_halfwidth: f64, t_center: f64, t_halfwidth: f64) -> Self {
        TestFunction::Bump {
            x_center,
            x_halfwidth,
            t_center,
            t_halfwidth,
            amplitude: 1.0,
        }
    }

    /// Closed time support `[t_lo, t_hi]`, or `None` for the zero function.
    pub fn time_support(&self) -> Option<(f64, f64)> {
        match *self {
            TestFunction::Zero => None,
            TestFunction::Bump {
                t_center,
                t_halfwidth,
                ..
            } => Some((t_center - t_halfwidth, t_center + t_halfwidth)),
        }
    }

    pub fn x_halfwidth(&self) -> f64 {
        match *self {
            TestFunction::Zero => 0.0,
            TestFunction::Bump { x_halfwidth, .. } => x_halfwidth,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TestFunction::Zero)
            || matches!(self, TestFunction::Bump { amplitude, .. } if *amplitude == 0.0)
    }

    /// Spatial profile derivatives (orders 0..=4) on a torus of length `length`.
    pub fn space_part(&self, x: f64, length: f64) -> [f64; 5] {
        match *self {
            TestFunction::Zero => [0.0; 5],
            TestFunction::Bump {
                x_center,
                x_halfwidth,
                ..
            } => {
                let dx = periodic_offset(x, x_center, length);
                let d = bump_derivatives(dx / x_halfwidth);
                let mut out = [0.0; 5];
                let mut scale = 1.0;
                for k in 0..5 {
                    out[k] = d[k] * scale;
                    scale /= x_halfwidth;
                }
                out
            }
        }
    }

    /// Temporal profile and its derivative, including the amplitude.
    pub fn time_part(&self, t: f64) -> (f64, f64) {
        match *self {
            TestFunction::Zero => (0.0, 0.0),
            TestFunction::Bump {
                t_center,
                t_halfwidth,
                amplitude,
                ..
            } => {
                let d = bump_derivatives((t - t_center) / t_halfwidth);
                (amplitude * d[0], amplitude * d[1] / t_halfwidth)
            }
        }
    }

    pub fn eval(&self, x: f64, t: f64, length: f64) -> PhiJet {
        let s = self.space_part(x, length);
        let (tt, tt_t) = self.time_part(t);
        PhiJet {
            phi: s[0] * tt,
            phi_t: s[0] * tt_t,
            phi_x: s[1] * tt,
            phi_xx: s[2] * tt,
            phi_xxx: s[3] * tt,
            phi_xxxx: s[4] * tt,
        }
    }
}

/// Smooth cutoff equal to 1 on `[-theta, theta]`, 0 outside `(-1, 1)`, as a
/// function of `s = (x - x0)/r`.
pub fn smooth_cutoff(s: f64, theta: f64) -> f64 {
    let a = s.abs();
    if a <= theta {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    // standard C-infinity transition built from exp(-1/u)
    let u = (a - theta) / (1.0 - theta);
    let g = |v: f64| if v <= 0.0 { 0.0 } else { (-1.0 / v).exp() };
    let num = g(1.0 - u);
    num / (num + g(u))
}

/// Default width of the transition region used by callers that need a
/// cutoff without further configuration.
pub const DEFAULT_THETA: f64 = 0.5;
