//! Energy balance, local energy balance and weak-form defects of a history.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::history::{HistoryOrigin, SpaceTimeHistory};
use crate::error::{domain_err, range_err, Result};
use crate::quad::{simpson_uniform, trapezoid_uniform};
use crate::spectral::{signed_pow, GridSpec1D, SpectralField1D};
use crate::testfn::TestFunction;

/// Minimum oversampling of the native grid for pointwise integrands.
const OVERSAMPLE: usize = 4;

/// Quadrature nodes per test-function half-width; the bump is only Gevrey
/// smooth, so the trapezoid rule needs it well resolved.
const NODES_PER_HALFWIDTH: f64 = 256.0;

/// Sample count: `q n` with `q >= OVERSAMPLE` a power of two fine enough for `phi`.
fn sample_count(grid: &GridSpec1D, phi: &TestFunction) -> usize {
    let mut q = OVERSAMPLE;
    let w = phi.x_halfwidth();
    while w > 0.0 && grid.length / (q * grid.n) as f64 > w / NODES_PER_HALFWIDTH && q < 1 << 12 {
        q *= 2;
    }
    q * grid.n
}

/// Signed defect of the global energy balance on `[t0, t1]`:
///
/// `1/2 |h(t1)|^2 - 1/2 |h(t0)|^2 + int int h_xx^2 - int int f h`.
///
/// Uses the per-step trace when both ends lie on it (composite Simpson),
/// otherwise the snapshots.
pub fn energy_residual(hist: &SpaceTimeHistory, t0: f64, t1: f64) -> Result<f64> {
    if t1 < t0 {
        return Err(range_err!("energy window [{t0}, {t1}] is reversed"));
    }
    if let Some(tr) = hist.trace() {
        if let (Some(i0), Some(i1)) = (tr.index_of(t0), tr.index_of(t1)) {
            if i0 == i1 {
                return Ok(0.0);
            }
            let diss = simpson_uniform(tr.dt, &tr.hxx_sq[i0..=i1]);
            let work = simpson_uniform(tr.dt, &tr.forcing_work[i0..=i1]);
            return Ok(0.5 * (tr.l2_sq[i1] - tr.l2_sq[i0]) + diss - work);
        }
    }
    hist.check_window(t0, t1)?;
    let i0 = hist.snapshot_index(t0)?;
    let i1 = hist.snapshot_index(t1)?;
    if i0 == i1 {
        return Ok(0.0);
    }
    let prepared = hist.forcing().prepare(hist.grid())?;
    let grid = *hist.grid();
    let mut fbuf = vec![Complex64::new(0.0, 0.0); grid.n];
    let mut diss = Vec::with_capacity(i1 - i0 + 1);
    let mut work = Vec::with_capacity(i1 - i0 + 1);
    for i in i0..=i1 {
        let h = &hist.snapshots()[i];
        let hxx = h.derivative(2);
        diss.push(hxx.l2_norm_sq());
        prepared.coeffs_at(hist.times()[i], &mut fbuf);
        let w: f64 = h
            .coeffs()
            .iter()
            .zip(fbuf.iter())
            .map(|(c, f)| (f * c.conj()).re)
            .sum();
        work.push(grid.length * w);
    }
    let h = hist.spacing();
    let e0 = hist.snapshots()[i0].l2_norm_sq();
    let e1 = hist.snapshots()[i1].l2_norm_sq();
    Ok(0.5 * (e1 - e0) + simpson_uniform(h, &diss) - simpson_uniform(h, &work))
}

/// Pointwise data of one snapshot on the oversampled grid.
struct Samples {
    xs: Vec<f64>,
    h: Vec<f64>,
    hx: Vec<f64>,
    hxx: Vec<f64>,
    f: Vec<f64>,
}

fn samples(hist: &SpaceTimeHistory, i: usize, m: usize, fbuf: &mut [Complex64]) -> Result<Samples> {
    let grid = *hist.grid();
    let h = &hist.snapshots()[i];
    let prepared = hist.forcing().prepare(&grid)?;
    prepared.coeffs_at(hist.times()[i], fbuf);
    let f = SpectralField1D::from_coeffs(grid, fbuf.to_vec())?;
    let dx = grid.length / m as f64;
    Ok(Samples {
        xs: (0..m).map(|j| j as f64 * dx).collect(),
        h: h.sample(m),
        hx: h.derivative(1).sample(m),
        hxx: h.derivative(2).sample(m),
        f: f.sample(m),
    })
}

/// Linear-only runs solve `h_t + h_xxxx = f`, so their balances carry no flux terms.
fn flux_factor(hist: &SpaceTimeHistory) -> f64 {
    match hist.origin() {
        HistoryOrigin::Solver { linear_only: true } => 0.0,
        _ => 1.0,
    }
}

fn check_test_function(hist: &SpaceTimeHistory, phi: &TestFunction) -> Result<()> {
    if let Some((a, b)) = phi.time_support() {
        hist.check_window(a, b)?;
    }
    if phi.x_halfwidth() > 0.5 * hist.grid().length {
        return Err(range_err!(
            "test function half-width {} exceeds half the period",
            phi.x_halfwidth()
        ));
    }
    Ok(())
}

/// Defect of the local energy balance at time `t` (left side minus right
/// side). Smooth solutions give zero up to discretization error; suitable
/// weak solutions give a non-positive value.
pub fn local_energy_residual(hist: &SpaceTimeHistory, phi: &TestFunction, t: f64) -> Result<f64> {
    if phi.is_zero() {
        return Ok(0.0);
    }
    if let TestFunction::Bump { amplitude, .. } = phi {
        if *amplitude < 0.0 {
            return Err(domain_err!(
                "the local energy balance needs a non-negative test function"
            ));
        }
    }
    check_test_function(hist, phi)?;
    let it = hist.snapshot_index(t)?;
    let grid = *hist.grid();
    let alpha = hist.alpha();
    let length = grid.length;
    let m = sample_count(&grid, phi);
    let dx = length / m as f64;
    let c_flux = (2.0 * alpha + 1.0) / (alpha + 1.0);
    let flux = flux_factor(hist);
    let mut fbuf = vec![Complex64::new(0.0, 0.0); grid.n];

    let mut integrand = Vec::with_capacity(it + 1);
    let mut endpoint = 0.0;
    for i in 0..=it {
        let s = samples(hist, i, m, &mut fbuf)?;
        let ti = hist.times()[i];
        let (tt, tt_t) = phi.time_part(ti);
        if tt == 0.0 && tt_t == 0.0 && i != it {
            integrand.push(0.0);
            continue;
        }
        let mut acc = 0.0;
        let mut end = 0.0;
        for j in 0..m {
            let sp = phi.space_part(s.xs[j], length);
            let (p, p_t) = (sp[0] * tt, sp[0] * tt_t);
            let (p_x, p_xx, p_xxxx) = (sp[1] * tt, sp[2] * tt, sp[4] * tt);
            let (h, hx, hxx, f) = (s.h[j], s.hx[j], s.hxx[j], s.f[j]);
            let pw = flux * hx.abs().powf(alpha);
            let rhs = 0.5 * (p_t - p_xxxx) * h * h + 2.0 * hx * hx * p_xx
                - c_flux * pw * hx * p_x
                - pw * h * p_xx
                + f * h * p;
            acc += hxx * hxx * p - rhs;
            if i == it {
                end += 0.5 * h * h * p;
            }
        }
        integrand.push(acc * dx);
        if i == it {
            endpoint = end * dx;
        }
    }
    Ok(endpoint + trapezoid_uniform(hist.spacing(), &integrand))
}

/// Defect of the distributional form
/// `int int (h phi_t - h_xx phi_xx - |h_x|^alpha phi_xx + f phi) = 0`.
pub fn weak_form_residual(hist: &SpaceTimeHistory, phi: &TestFunction) -> Result<f64> {
    if phi.is_zero() {
        return Ok(0.0);
    }
    check_test_function(hist, phi)?;
    let grid = *hist.grid();
    let alpha = hist.alpha();
    let length = grid.length;
    let m = sample_count(&grid, phi);
    let dx = length / m as f64;
    let mut fbuf = vec![Complex64::new(0.0, 0.0); grid.n];
    let flux = flux_factor(hist);
    let mut integrand = Vec::with_capacity(hist.len());
    for i in 0..hist.len() {
        let (tt, tt_t) = phi.time_part(hist.times()[i]);
        if tt == 0.0 && tt_t == 0.0 {
            integrand.push(0.0);
            continue;
        }
        let s = samples(hist, i, m, &mut fbuf)?;
        let mut acc = 0.0;
        for j in 0..m {
            let sp = phi.space_part(s.xs[j], length);
            let pw = flux * s.hx[j].abs().powf(alpha);
            acc += s.h[j] * sp[0] * tt_t - (s.hxx[j] + pw) * sp[2] * tt + s.f[j] * sp[0] * tt;
        }
        integrand.push(acc * dx);
    }
    Ok(trapezoid_uniform(hist.spacing(), &integrand))
}

/// `int |h_x|^alpha h_xx dx` on the oversampled grid (aliasing diagnostic only).
pub fn cancellation_on_grid(h: &SpectralField1D, alpha: f64, oversample: usize) -> f64 {
    let m = oversample * h.grid().n;
    let hx = h.derivative(1).sample(m);
    let hxx = h.derivative(2).sample(m);
    let dx = h.grid().length / m as f64;
    hx.iter()
        .zip(hxx.iter())
        .map(|(a, b)| signed_pow(a.abs(), alpha) * b)
        .sum::<f64>()
        * dx
}
