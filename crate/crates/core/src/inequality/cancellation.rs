//! The nonlinear cancellation `int |h_x|^alpha h_xx dx = 0`.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::quad::{bisect, tanh_sinh};
use crate::spectral::{signed_pow, SpectralField1D};

/// Points per native cell used to bracket zeros of `h_x`.
const BRACKET_REFINE: usize = 16;

/// Zeros of `h_x` on `[0, L)`, located by sign changes on a refined grid and
/// polished by bisection on the spectral interpolant.
pub fn derivative_zeros(h: &SpectralField1D) -> Vec<f64> {
    let grid = h.grid();
    let m = BRACKET_REFINE * grid.n;
    let dx = grid.length / m as f64;
    let hx = h.derivative(1);
    let vals = hx.sample(m);
    let mut zeros = Vec::new();
    for j in 0..m {
        let (a, b) = (vals[j], vals[(j + 1) % m]);
        let xa = j as f64 * dx;
        if a == 0.0 {
            zeros.push(xa);
        } else if (a > 0.0) != (b > 0.0) && b != 0.0 {
            zeros.push(bisect(|x| hx.evaluate(x), xa, xa + dx, a));
        }
    }
    zeros
}

/// `int_T |h_x|^alpha h_xx dx`, integrated piece by piece between
/// consecutive zeros of `h_x`, where the integrand is smooth inside and at
/// worst Holder at the ends. Each piece is an exact derivative, so the sum is
/// zero up to quadrature roundoff.
pub fn check_cancellation(h: &SpectralField1D, alpha: f64) -> f64 {
    let length = h.grid().length;
    let zeros = derivative_zeros(h);
    let integrand = |x: f64| {
        let j = h.evaluate_jet(x);
        j[1].abs().powf(alpha) * j[2]
    };
    match zeros.len() {
        0 => {
            // no sign change: h_x vanishes identically or only touches zero
            let m = BRACKET_REFINE * h.grid().n;
            let hx = h.derivative(1).sample(m);
            let hxx = h.derivative(2).sample(m);
            hx.iter()
                .zip(&hxx)
                .map(|(a, b)| signed_pow(a.abs(), alpha) * b)
                .sum::<f64>()
                * length
                / m as f64
        }
        k => {
            let mut total = 0.0;
            for i in 0..k {
                let a = zeros[i];
                let b = if i + 1 < k {
                    zeros[i + 1]
                } else {
                    zeros[0] + length
                };
                total += tanh_sinh(integrand, a, b, 1e-15);
            }
            total
        }
    }
}

/// Reference scale `||h_x||_inf^alpha ||h_xx||_{L^1}` on the refined grid.
pub fn cancellation_scale(h: &SpectralField1D, alpha: f64) -> f64 {
    let m = BRACKET_REFINE * h.grid().n;
    let hx = h.derivative(1).sample(m);
    let hxx = h.derivative(2).sample(m);
    let sup = hx.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let l1 = hxx.iter().map(|v| v.abs()).sum::<f64>() * h.grid().length / m as f64;
    sup.powf(alpha) * l1
}
