//! Exponential time differencing for `h_t = -h_xxxx + N(h, t)`,
//! `N(h, t) = -d_xx |h_x|^alpha + f`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::config::{Scheme, SolverConfig};
use super::forcing::PreparedForcing;
use super::history::{EnergyTrace, HistoryOrigin, SpaceTimeHistory};
use crate::error::{config_err, Error, Result};
use crate::spectral::{SpectralField1D, SpectralWorkspace};

/// Number of contour points used for the phi-functions.
const CONTOUR_POINTS: usize = 32;

/// Per-mode ETDRK4 coefficients for a real diagonal linear part.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    pub(crate) e: Vec<f64>,
    pub(crate) e2: Vec<f64>,
    pub(crate) q: Vec<f64>,
    pub(crate) f1: Vec<f64>,
    pub(crate) f2: Vec<f64>,
    pub(crate) f3: Vec<f64>,
    /// `dt * phi_1(L dt)` for exponential Euler.
    pub(crate) p1: Vec<f64>,
}

impl Coefficients {
    /// Contour-averaged phi-functions (Kassam-Trefethen); the exponentials
    /// themselves are exact.
    pub(crate) fn new(linear: &[f64], dt: f64) -> Self {
        let m = linear.len();
        let mut c = Coefficients {
            e: vec![0.0; m],
            e2: vec![0.0; m],
            q: vec![0.0; m],
            f1: vec![0.0; m],
            f2: vec![0.0; m],
            f3: vec![0.0; m],
            p1: vec![0.0; m],
        };
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| {
                let th = PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
                Complex64::new(th.cos(), th.sin())
            })
            .collect();
        for (i, &l) in linear.iter().enumerate() {
            let ldt = l * dt;
            c.e[i] = ldt.exp();
            c.e2[i] = (0.5 * ldt).exp();
            let (mut q, mut f1, mut f2, mut f3, mut p1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            // upper half of the circle; conjugate points contribute the conjugate
            for r in &roots {
                let z = Complex64::new(ldt, 0.0) + r;
                let ez = z.exp();
                let ez2 = (z * 0.5).exp();
                let z2 = z * z;
                let z3 = z2 * z;
                q += ((ez2 - 1.0) / z).re;
                f1 += ((-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3).re;
                f2 += ((2.0 + z + ez * (z - 2.0)) / z3).re;
                f3 += ((-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3).re;
                p1 += ((ez - 1.0) / z).re;
            }
            let mf = CONTOUR_POINTS as f64;
            c.q[i] = dt * q / mf;
            c.f1[i] = dt * f1 / mf;
            c.f2[i] = dt * f2 / mf;
            c.f3[i] = dt * f3 / mf;
            c.p1[i] = dt * p1 / mf;
        }
        c
    }
}

/// Reusable state for repeated steps with one configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    alpha: f64,
    dt: f64,
    scheme: Scheme,
    linear_only: bool,
    ws: SpectralWorkspace,
    forcing: PreparedForcing,
    coef: Coefficients,
    nv: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl Stepper {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid;
        let linear: Vec<f64> = (0..grid.n)
            .map(|j| {
                let k = grid.wavenumber(j);
                -(k * k) * (k * k)
            })
            .collect();
        let z = vec![Complex64::new(0.0, 0.0); grid.n];
        Ok(Self {
            alpha: cfg.alpha,
            dt: cfg.dt,
            scheme: cfg.scheme,
            linear_only: cfg.linear_only,
            ws: SpectralWorkspace::new(grid)?,
            forcing: cfg.forcing.prepare(&grid)?,
            coef: Coefficients::new(&linear, cfg.dt),
            nv: z.clone(),
            na: z.clone(),
            nb: z.clone(),
            nc: z.clone(),
            a: z.clone(),
            b: z.clone(),
            c: z,
        })
    }

    pub fn forcing(&self) -> &PreparedForcing {
        &self.forcing
    }

    /// `N(v, t)` written into `out`.
    fn rhs(
        ws: &mut SpectralWorkspace,
        forcing: &PreparedForcing,
        alpha: f64,
        linear_only: bool,
        v: &[Complex64],
        t: f64,
        out: &mut [Complex64],
    ) {
        if linear_only {
            for o in out.iter_mut() {
                *o = Complex64::new(0.0, 0.0);
            }
        } else {
            ws.nonlinear_into(v, alpha, out);
            for o in out.iter_mut() {
                *o = -*o;
            }
        }
        forcing.add_to(t, out);
    }

    /// Advances `v` (coefficients at time `t`) by one step in place.
    pub fn advance(&mut self, v: &mut [Complex64], t: f64) {
        let dt = self.dt;
        let (alpha, lin) = (self.alpha, self.linear_only);
        let co = &self.coef;
        match self.scheme {
            Scheme::ExpEuler => {
                Self::rhs(&mut self.ws, &self.forcing, alpha, lin, v, t, &mut self.nv);
                for i in 0..v.len() {
                    v[i] = v[i] * co.e[i] + self.nv[i] * co.p1[i];
                }
            }
            Scheme::Etdrk4 => {
                Self::rhs(&mut self.ws, &self.forcing, alpha, lin, v, t, &mut self.nv);
                for i in 0..v.len() {
                    self.a[i] = v[i] * co.e2[i] + self.nv[i] * co.q[i];
                }
                Self::rhs(
                    &mut self.ws,
                    &self.forcing,
                    alpha,
                    lin,
                    &self.a,
                    t + 0.5 * dt,
                    &mut self.na,
                );
                for i in 0..v.len() {
                    self.b[i] = v[i] * co.e2[i] + self.na[i] * co.q[i];
                }
                Self::rhs(
                    &mut self.ws,
                    &self.forcing,
                    alpha,
                    lin,
                    &self.b,
                    t + 0.5 * dt,
                    &mut self.nb,
                );
                for i in 0..v.len() {
                    self.c[i] = self.a[i] * co.e2[i] + (self.nb[i] * 2.0 - self.nv[i]) * co.q[i];
                }
                Self::rhs(
                    &mut self.ws,
                    &self.forcing,
                    alpha,
                    lin,
                    &self.c,
                    t + dt,
                    &mut self.nc,
                );
                for i in 0..v.len() {
                    v[i] = v[i] * co.e[i]
                        + self.nv[i] * co.f1[i]
                        + (self.na[i] + self.nb[i]) * (2.0 * co.f2[i])
                        + self.nc[i] * co.f3[i];
                }
            }
        }
    }
}

/// Sup-norm guard: cheap coefficient bound first, exact grid maximum if needed.
fn exceeds_ceiling(h: &SpectralField1D, ceiling: f64) -> bool {
    if h.coeffs()
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return true;
    }
    let bound: f64 = h.coeffs().iter().map(|c| c.norm()).sum();
    if bound <= ceiling {
        return false;
    }
    h.inverse().iter().any(|v| v.abs() > ceiling)
}

/// One step from `h` at time `t`.
pub fn step(h: &SpectralField1D, cfg: &SolverConfig, t: f64) -> Result<SpectralField1D> {
    if *h.grid() != cfg.grid {
        return Err(config_err!("state grid differs from the configured grid"));
    }
    let mut stepper = Stepper::new(cfg)?;
    let mut v = h.coeffs().to_vec();
    stepper.advance(&mut v, t);
    let out = SpectralField1D::from_coeffs(cfg.grid, v)?;
    if exceeds_ceiling(&out, cfg.sup_ceiling) {
        return Err(Error::BlowUpSuspected {
            last_finite_time: t,
        });
    }
    Ok(out)
}

/// Failure of a run, with whatever was recorded before it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub cause: Error,
    pub partial: Option<Box<SpaceTimeHistory>>,
}

impl core::fmt::Display for RunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.cause)
    }
}

impl From<Error> for RunError {
    fn from(cause: Error) -> Self {
        RunError {
            cause,
            partial: None,
        }
    }
}

/// Integrates from the initial data to `t_end`, keeping every
/// `snapshot_stride`-th state.
pub fn run(cfg: &SolverConfig) -> core::result::Result<SpaceTimeHistory, RunError> {
    cfg.validate()?;
    let steps = cfg.step_count()?;
    let grid = cfg.grid;
    let mut stepper = Stepper::new(cfg)?;
    let h0 = cfg.initial.build(&grid, cfg.seed)?;
    let origin = HistoryOrigin::Solver {
        linear_only: cfg.linear_only,
    };

    let mut fbuf = vec![Complex64::new(0.0, 0.0); grid.n];
    let has_forcing = !stepper.forcing().is_zero();
    let mut trace = cfg.record_trace.then(|| EnergyTrace {
        t0: 0.0,
        dt: cfg.dt,
        ..EnergyTrace::default()
    });
    let record = |trace: &mut Option<EnergyTrace>,
                  h: &SpectralField1D,
                  t: f64,
                  fbuf: &mut Vec<Complex64>,
                  st: &Stepper| {
        if let Some(tr) = trace.as_mut() {
            if has_forcing {
                st.forcing().coeffs_at(t, fbuf);
                tr.push(h, Some(fbuf));
            } else {
                tr.push(h, None);
            }
        }
    };

    let mut times = vec![0.0];
    let mut snaps = vec![h0.clone()];
    record(&mut trace, &h0, 0.0, &mut fbuf, &stepper);

    let mut v = h0.coeffs().to_vec();
    let mut current = h0;
    for i in 0..steps {
        let t = i as f64 * cfg.dt;
        stepper.advance(&mut v, t);
        let next = SpectralField1D::from_coeffs(grid, v.clone())?;
        if exceeds_ceiling(&next, cfg.sup_ceiling) {
            let partial =
                SpaceTimeHistory::new(grid, cfg.alpha, times, snaps, cfg.forcing.clone(), origin)
                    .ok()
                    .map(|h| Box::new(h.with_trace(trace)));
            return Err(RunError {
                cause: Error::BlowUpSuspected {
                    last_finite_time: t,
                },
                partial,
            });
        }
        // keep the stored coefficients exactly Hermitian
        v.copy_from_slice(next.coeffs());
        current = next;
        let t_next = (i + 1) as f64 * cfg.dt;
        record(&mut trace, &current, t_next, &mut fbuf, &stepper);
        if (i + 1) % cfg.snapshot_stride == 0 {
            times.push(t_next);
            snaps.push(current.clone());
        }
    }
    let _ = current;
    Ok(
        SpaceTimeHistory::new(grid, cfg.alpha, times, snaps, cfg.forcing.clone(), origin)?
            .with_trace(trace),
    )
}
