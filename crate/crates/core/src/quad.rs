//! Quadrature rules, root bracketing and least-squares fitting.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

/// Composite Simpson rule on uniformly spaced samples.
///
/// An odd number of intervals is closed with the 3/8 rule on the last
/// three; a single interval falls back to the trapezoid.
pub fn simpson_uniform(h: f64, ys: &[f64]) -> f64 {
    let m = ys.len();
    if m < 2 {
        return 0.0;
    }
    let intervals = m - 1;
    if intervals == 1 {
        return 0.5 * h * (ys[0] + ys[1]);
    }
    let (even_part, tail) = if intervals % 2 == 0 {
        (intervals, 0)
    } else {
        (intervals - 3, 3)
    };
    let mut acc = 0.0;
    if even_part > 0 {
        let mut s = ys[0] + ys[even_part];
        for (i, y) in ys.iter().enumerate().take(even_part).skip(1) {
            s += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
        }
        acc += s * h / 3.0;
    }
    if tail == 3 {
        let b = even_part;
        acc += 3.0 * h / 8.0 * (ys[b] + 3.0 * ys[b + 1] + 3.0 * ys[b + 2] + ys[b + 3]);
    }
    acc
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid_uniform(h: f64, ys: &[f64]) -> f64 {
    match ys.len() {
        0 | 1 => 0.0,
        m => h * (0.5 * (ys[0] + ys[m - 1]) + ys[1..m - 1].iter().sum::<f64>()),
    }
}

/// Antiderivative of the unit hat function `max(0, 1 - |u|)`.
#[inline]
fn hat_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s <= 0.0 {
        0.5 * (1.0 + s) * (1.0 + s)
    } else if s < 1.0 {
        1.0 - 0.5 * (1.0 - s) * (1.0 - s)
    } else {
        1.0
    }
}

/// Weight of the node at `node` (spacing `h`) when the piecewise-linear
/// interpolant is integrated over `[a, b]`.
#[inline]
pub fn hat_weight(node: f64, h: f64, a: f64, b: f64) -> f64 {
    h * (hat_cdf((b - node) / h) - hat_cdf((a - node) / h))
}

/// Nodal weights integrating the periodic piecewise-linear interpolant on
/// `n` nodes `j h` over `[a, b]` (`b - a <= n h`). Returns `(index, weight)`
/// pairs; an index may repeat when the interval wraps.
pub fn periodic_hat_weights(n: usize, h: f64, a: f64, b: f64) -> Vec<(usize, f64)> {
    let lo = (a / h).floor() as i64 - 1;
    let hi = (b / h).ceil() as i64 + 1;
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for j in lo..=hi {
        let w = hat_weight(j as f64 * h, h, a, b);
        if w > 0.0 {
            out.push((j.rem_euclid(n as i64) as usize, w));
        }
    }
    out
}

/// Nodal weights for the piecewise-linear interpolant on non-periodic nodes
/// `t0 + i h`, `i < m`, over `[a, b]`, which must lie inside the node range.
pub fn interval_hat_weights(m: usize, t0: f64, h: f64, a: f64, b: f64) -> Vec<(usize, f64)> {
    if m == 0 {
        return Vec::new();
    }
    if m == 1 || h <= 0.0 {
        return alloc::vec![(0, 0.0)];
    }
    let lo = (((a - t0) / h).floor() as i64 - 1).max(0);
    let hi = (((b - t0) / h).ceil() as i64 + 1).min(m as i64 - 1);
    let mut out = Vec::new();
    for i in lo..=hi {
        let w = hat_weight(t0 + i as f64 * h, h, a, b);
        if w > 0.0 {
            out.push((i as usize, w));
        }
    }
    out
}

/// Value at `t` of the piecewise-linear interpolant of samples on `t0 + i h`.
pub fn interp_linear(t0: f64, h: f64, ys: &[f64], t: f64) -> f64 {
    let m = ys.len();
    if m == 1 || h <= 0.0 {
        return ys[0];
    }
    let s = ((t - t0) / h).clamp(0.0, (m - 1) as f64);
    let i = (s.floor() as usize).min(m - 2);
    let frac = s - i as f64;
    ys[i] * (1.0 - frac) + ys[i + 1] * frac
}

/// Double-exponential (tanh-sinh) quadrature of a function that is smooth on
/// `(a, b)` but may be non-smooth at the endpoints.
///
/// Refinement stops once successive estimates agree to `rel_tol` times the
/// larger of the estimate and the integral of `|f|`, so integrals that cancel
/// to zero still terminate.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let d = 0.5 * (b - a);
    const T_MAX: f64 = 3.2;
    // abscissa and weight at parameter t, with the distance to the nearer
    // endpoint computed without cancellation
    let mut node = |t: f64| -> (f64, f64) {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        let gap = d * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let x = if t >= 0.0 { b - gap } else { a + gap };
        if gap <= 0.0 {
            return (0.0, 0.0);
        }
        let v = d * w * f(x);
        (v, v.abs())
    };
    let mut h = 0.5;
    let (mut sum, mut mass) = node(0.0);
    let mut add = |t: f64, sum: &mut f64, mass: &mut f64| {
        let (a, am) = node(t);
        let (b, bm) = node(-t);
        *sum += a + b;
        *mass += am + bm;
    };
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        add(k as f64 * h, &mut sum, &mut mass);
        k += 1;
    }
    let mut estimate = h * sum;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            add(k as f64 * h, &mut sum, &mut mass);
            k += 2;
        }
        let next = h * sum;
        let scale = next.abs().max(h * mass).max(f64::MIN_POSITIVE);
        let done = (next - estimate).abs() <= rel_tol * scale;
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let m = xs.len();
    if m < 2 || ys.len() != m {
        return None;
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    Some(LineFit {
        slope,
        intercept,
        residual: (ss / mf).sqrt(),
    })
}

/// Slope of `log y` against `log x`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}
