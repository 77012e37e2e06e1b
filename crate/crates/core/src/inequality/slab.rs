//! Space-time norms over balls and time windows of a history, evaluated on
//! the spectral interpolant (Gauss-Legendre panels in space, piecewise-linear
//! in time).

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{range_err, Result};
use crate::quad::{bisect, interp_linear, interval_hat_weights, tanh_sinh};
use crate::sgm::SpaceTimeHistory;
use crate::spectral::SpectralField1D;

const GL_POINTS: usize = 8;

/// Bracketing points per native cell when splitting at sign changes.
const BRACKET_REFINE: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(m);
    let mut ws = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs.push(x);
        ws.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

/// How points in the ball are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Placement {
    /// Integration nodes with weights.
    Quadrature,
    /// Equispaced points including both ends and the center, for suprema.
    Sampling,
}

/// Spatial rule on `B(x0, r)`.
#[derive(Debug, Clone)]
pub(crate) struct BallRule {
    pub xs: Vec<f64>,
    pub ws: Vec<f64>,
}

impl BallRule {
    pub fn new(length: f64, n: usize, x0: f64, r: f64, placement: Placement) -> Result<Self> {
        if !(r > 0.0) || 2.0 * r > length * (1.0 + 1e-12) {
            return Err(range_err!(
                "ball radius {r} does not fit the period {length}"
            ));
        }
        let dx = length / n as f64;
        let full = (2.0 * r - length).abs() <= 1e-12 * length;
        match placement {
            Placement::Quadrature if full => {
                // trapezoid over a whole period is exact for the band-limited data
                let m = 8 * n;
                let h = length / m as f64;
                Ok(Self {
                    xs: (0..m).map(|j| x0 - 0.5 * length + j as f64 * h).collect(),
                    ws: alloc::vec![h; m],
                })
            }
            Placement::Quadrature => {
                let (gx, gw) = gauss_legendre(GL_POINTS);
                let panels = ((2.0 * r / dx).ceil() as usize).max(1);
                let pw = 2.0 * r / panels as f64;
                let mut xs = Vec::with_capacity(panels * GL_POINTS);
                let mut ws = Vec::with_capacity(panels * GL_POINTS);
                for p in 0..panels {
                    let mid = x0 - r + (p as f64 + 0.5) * pw;
                    for (x, w) in gx.iter().zip(&gw) {
                        xs.push(mid + 0.5 * pw * x);
                        ws.push(0.5 * pw * w);
                    }
                }
                Ok(Self { xs, ws })
            }
            Placement::Sampling => {
                let half = (8.0 * r / dx).ceil().max(1.0) as usize;
                let h = r / half as f64;
                let xs = (0..=2 * half).map(|j| x0 - r + j as f64 * h).collect();
                Ok(Self {
                    xs,
                    ws: alloc::vec![0.0; 2 * half + 1],
                })
            }
        }
    }
}

/// Jets `(h, h_y, h_yy)` on a ball rule for every snapshot needed by one
/// time window, plus the snapshots (and forcing) for sign-aware integrals.
pub(crate) struct WindowData {
    pub rule: BallRule,
    /// Snapshot indices covering `[a, b]`, ascending.
    pub snaps: Vec<usize>,
    pub times: Vec<f64>,
    pub jets: Vec<Vec<[f64; 3]>>,
    /// Time weights as `(position in snaps, weight)`.
    pub tw: Vec<(usize, f64)>,
    pub a: f64,
    pub b: f64,
    spacing: f64,
    x0: f64,
    r: f64,
    dx: f64,
    fields: Vec<SpectralField1D>,
    forcing_fields: Vec<SpectralField1D>,
}

/// Which function `|u - shift|^q` is integrated by [`WindowData::abs_power`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Component {
    H,
    Hy,
    Forcing,
}

/// `int_lo^hi |u - shift|^q` split at the sign changes of `u - shift`, so
/// that every piece is smooth inside; composite Gauss-Legendre with panels no
/// wider than `dx` on each piece.
fn abs_power_integral<U: Fn(f64) -> f64>(
    u: U,
    lo: f64,
    hi: f64,
    dx: f64,
    shift: f64,
    q: f64,
) -> f64 {
    let g = |x: f64| u(x) - shift;
    let cells = ((hi - lo) / dx * BRACKET_REFINE as f64).ceil().max(1.0) as usize;
    let step = (hi - lo) / cells as f64;
    let mut breaks = alloc::vec![lo];
    let mut ga = g(lo);
    for j in 0..cells {
        let xa = lo + j as f64 * step;
        let xb = if j + 1 == cells { hi } else { xa + step };
        let gb = g(xb);
        if ga != 0.0 && gb != 0.0 && (ga > 0.0) != (gb > 0.0) {
            breaks.push(bisect(&g, xa, xb, ga));
        }
        ga = gb;
    }
    breaks.push(hi);
    let (gx, gw) = gauss_legendre(GL_POINTS);
    let f = |x: f64| g(x).abs().powf(q);
    let last = breaks.len() - 2;
    let mut total = 0.0;
    for (k, w) in breaks.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / dx).ceil().max(1.0) as usize;
        let pw = (b - a) / panels as f64;
        for p in 0..panels {
            let (pa, pb) = (a + p as f64 * pw, a + (p + 1) as f64 * pw);
            // |u|^q is only Holder at a zero of u; tanh-sinh absorbs that
            let at_zero = (p == 0 && k > 0) || (p + 1 == panels && k < last);
            if at_zero {
                total += tanh_sinh(f, pa, pb, 1e-14);
            } else {
                let mid = 0.5 * (pa + pb);
                for (x, wt) in gx.iter().zip(&gw) {
                    total += 0.5 * pw * wt * f(mid + 0.5 * pw * x);
                }
            }
        }
    }
    total
}

impl WindowData {
    pub fn new(
        hist: &SpaceTimeHistory,
        x0: f64,
        r: f64,
        a: f64,
        b: f64,
        placement: Placement,
        with_forcing: bool,
    ) -> Result<Self> {
        hist.check_window(a, b)?;
        let grid = *hist.grid();
        let rule = BallRule::new(grid.length, grid.n, x0, r, placement)?;
        let times = hist.times();
        let m = times.len();
        let (lo, hi) = if m == 1 {
            (0, 0)
        } else {
            let dt = hist.spacing();
            let lo = (((a - times[0]) / dt).floor().max(0.0) as usize).min(m - 1);
            let hi = (((b - times[0]) / dt).ceil().max(0.0) as usize).min(m - 1);
            (lo, hi)
        };
        let snaps: Vec<usize> = (lo..=hi).collect();
        let jets = snaps
            .iter()
            .map(|&i| {
                let f = &hist.snapshots()[i];
                rule.xs.iter().map(|&x| f.evaluate_jet(x)).collect()
            })
            .collect();
        let mut forcing_fields = Vec::new();
        if with_forcing && !hist.forcing().is_zero() {
            let prepared = hist.forcing().prepare(&grid)?;
            let mut buf = alloc::vec![Complex64::new(0.0, 0.0); grid.n];
            for &i in &snaps {
                prepared.coeffs_at(times[i], &mut buf);
                let f = SpectralField1D::from_coeffs(grid, buf.clone())?;
                forcing_fields.push(f);
            }
        }
        let fields = snaps.iter().map(|&i| hist.snapshots()[i].clone()).collect();
        let local_times: Vec<f64> = snaps.iter().map(|&i| times[i]).collect();
        let spacing = if m > 1 { hist.spacing() } else { 0.0 };
        let tw = interval_hat_weights(snaps.len(), local_times[0], spacing, a, b);
        Ok(Self {
            rule,
            snaps,
            times: local_times,
            jets,
            tw,
            a,
            b,
            spacing,
            x0,
            r: r.min(0.5 * grid.length),
            dx: grid.dx(),
            fields,
            forcing_fields,
        })
    }

    /// `int_B |u - shift|^q dx` at each covered snapshot, accurate despite the
    /// kinks of `|.|` at sign changes.
    pub fn abs_power(&self, c: Component, shift: f64, q: f64) -> Vec<f64> {
        let (lo, hi) = (self.x0 - self.r, self.x0 + self.r);
        match c {
            Component::H => self
                .fields
                .iter()
                .map(|f| abs_power_integral(|x| f.evaluate(x), lo, hi, self.dx, shift, q))
                .collect(),
            Component::Hy => self
                .fields
                .iter()
                .map(|f| abs_power_integral(|x| f.evaluate_jet(x)[1], lo, hi, self.dx, shift, q))
                .collect(),
            Component::Forcing => {
                if self.forcing_fields.is_empty() {
                    return alloc::vec![0.0; self.fields.len()];
                }
                self.forcing_fields
                    .iter()
                    .map(|f| abs_power_integral(|x| f.evaluate(x), lo, hi, self.dx, shift, q))
                    .collect()
            }
        }
    }

    /// Window integral of [`WindowData::abs_power`].
    pub fn abs_power_integral(&self, c: Component, shift: f64, q: f64) -> f64 {
        self.time_integral(&self.abs_power(c, shift, q))
    }

    /// `int_B g(jet) dx` at each covered snapshot.
    pub fn per_time<G: Fn(&[f64; 3]) -> f64>(&self, g: G) -> Vec<f64> {
        self.jets
            .iter()
            .map(|jet| jet.iter().zip(&self.rule.ws).map(|(j, w)| w * g(j)).sum())
            .collect()
    }

    /// `int int g(jet)` over the window.
    pub fn integral<G: Fn(&[f64; 3]) -> f64>(&self, g: G) -> f64 {
        let s = self.per_time(g);
        self.tw.iter().map(|&(i, w)| w * s[i]).sum()
    }

    /// Time integral of per-snapshot values.
    pub fn time_integral(&self, s: &[f64]) -> f64 {
        self.tw.iter().map(|&(i, w)| w * s[i]).sum()
    }

    /// `int int |f|` over the window, zero without forcing.
    pub fn forcing_l1(&self) -> f64 {
        self.abs_power_integral(Component::Forcing, 0.0, 1.0)
    }

    /// Max over in-window snapshots and interpolated endpoints of
    /// per-snapshot values.
    pub fn sup_in_time(&self, s: &[f64]) -> f64 {
        let mut best = interp_linear(self.times[0], self.spacing, s, self.a).max(interp_linear(
            self.times[0],
            self.spacing,
            s,
            self.b,
        ));
        for (t, v) in self.times.iter().zip(s) {
            if *t >= self.a && *t <= self.b {
                best = best.max(*v);
            }
        }
        best
    }

    /// Pointwise max of `g` over the window; endpoint states are linearly
    /// interpolated between snapshots.
    pub fn sup_pointwise<G: Fn(&[f64; 3]) -> f64>(&self, g: G) -> f64 {
        let mut best = 0.0f64;
        for (t, jet) in self.times.iter().zip(&self.jets) {
            if *t >= self.a && *t <= self.b {
                best = jet.iter().fold(best, |m, j| m.max(g(j)));
            }
        }
        for &te in &[self.a, self.b] {
            if self.times.len() < 2 {
                break;
            }
            let s = ((te - self.times[0]) / self.spacing).clamp(0.0, (self.times.len() - 1) as f64);
            let i = (s.floor() as usize).min(self.times.len() - 2);
            let frac = s - i as f64;
            for (j0, j1) in self.jets[i].iter().zip(&self.jets[i + 1]) {
                let mut j = [0.0; 3];
                for c in 0..3 {
                    j[c] = j0[c] * (1.0 - frac) + j1[c] * frac;
                }
                best = best.max(g(&j));
            }
        }
        best
    }
}
