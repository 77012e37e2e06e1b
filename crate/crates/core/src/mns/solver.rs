//! ETDRK4 for `u_t = Delta u - P[u . grad s(u_i)]`, `s(v) = sign(v) |v|^{alpha-1}`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::field::{
    leray_project, pad3, padded_side, truncate3, wavevector, Fft3, PressureField3D,
    VelocityField3D, BOX_LENGTH, ZERO,
};
use crate::error::{config_err, domain_err, Error, Result};
use crate::quad::simpson_uniform;
use crate::rng::{normal, stream};
use crate::sgm::Coefficients;
use crate::spectral::signed_pow;

/// Mode counts accepted by the solver.
pub const MNS_SIDES: [usize; 2] = [16, 32];

/// Initial velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MnsInitial {
    Zero,
    TaylorGreen {
        amplitude: f64,
    },
    /// Gaussian modes with `1 <= |k|_inf <= kmax`, projected and rescaled
    /// so that `int |u|^2 = energy`.
    RandomSolenoidal {
        kmax: usize,
        energy: f64,
    },
}

impl MnsInitial {
    pub fn build(&self, n: usize, seed: u64) -> Result<VelocityField3D> {
        match self {
            MnsInitial::Zero => VelocityField3D::zeros(n),
            MnsInitial::TaylorGreen { amplitude } => VelocityField3D::taylor_green(n, *amplitude),
            MnsInitial::RandomSolenoidal { kmax, energy } => {
                if *kmax == 0 || *kmax >= n / 2 {
                    return Err(config_err!("kmax = {kmax} must lie in [1, {})", n / 2));
                }
                if !(*energy >= 0.0) {
                    return Err(config_err!("initial energy must be non-negative"));
                }
                let mut rng = stream(seed, 0);
                let mut comps = [
                    vec![ZERO; n * n * n],
                    vec![ZERO; n * n * n],
                    vec![ZERO; n * n * n],
                ];
                for idx in 0..n * n * n {
                    let k = wavevector(idx, n);
                    let kinf = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if kinf >= 1.0 && kinf <= *kmax as f64 {
                        for c in comps.iter_mut() {
                            c[idx] = Complex64::new(normal(&mut rng), normal(&mut rng));
                        }
                    }
                }
                // Hermitian part gives a real field
                let raw = VelocityField3D::from_coeffs(n, comps)?;
                let s = raw.samples(n)?;
                let u = VelocityField3D::from_samples(n, [&s[0], &s[1], &s[2]])?;
                let e = u.energy();
                Ok(if e > 0.0 {
                    u.scaled((energy / e).sqrt())
                } else {
                    u
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnsConfig {
    pub n: usize,
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    pub initial: MnsInitial,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ceiling")]
    pub sup_ceiling: f64,
}

fn one() -> usize {
    1
}

fn default_ceiling() -> f64 {
    1e8
}

impl MnsConfig {
    pub fn new(n: usize, alpha: f64, dt: f64, t_end: f64, initial: MnsInitial) -> Self {
        Self {
            n,
            alpha,
            dt,
            t_end,
            initial,
            snapshot_stride: 1,
            seed: 0,
            sup_ceiling: default_ceiling(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !MNS_SIDES.contains(&self.n) {
            return Err(config_err!(
                "MNS mode count {} must be one of {:?}",
                self.n,
                MNS_SIDES
            ));
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(domain_err!("alpha = {} must exceed 1", self.alpha));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end >= 0.0) {
            return Err(config_err!("need dt > 0 and t_end >= 0"));
        }
        if self.snapshot_stride == 0 {
            return Err(config_err!("snapshot stride must be positive"));
        }
        self.step_count().map(|_| ())
    }

    pub fn step_count(&self) -> Result<usize> {
        let s = self.t_end / self.dt;
        let k = s.round();
        if (s - k).abs() > 1e-9 * s.max(1.0) {
            return Err(config_err!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end,
                self.dt
            ));
        }
        Ok(k as usize)
    }
}

/// Advective time-step bound `dt (alpha - 1) max|u|^{alpha-1} (n/2) <= 1`.
pub fn cfl_number(u: &VelocityField3D, alpha: f64, dt: f64) -> Result<f64> {
    let n = u.side();
    let s = u.samples(padded_side(n))?;
    let sup = s
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(dt * (alpha - 1.0) * sup.powf(alpha - 1.0) * (n / 2) as f64)
}

/// Scratch for dealiased products on the padded grid.
#[derive(Debug, Clone)]
pub struct MnsWorkspace {
    n: usize,
    m: usize,
    fft: Fft3,
    u: [Vec<f64>; 3],
    spec: Vec<Complex64>,
    buf: Vec<Complex64>,
    acc: Vec<f64>,
}

impl MnsWorkspace {
    pub fn new(n: usize) -> Result<Self> {
        super::field::check_side(n)?;
        let m = padded_side(n);
        let len = m * m * m;
        Ok(Self {
            n,
            m,
            fft: Fft3::new(m)?,
            u: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            spec: vec![ZERO; len],
            buf: vec![ZERO; len],
            acc: vec![0.0; len],
        })
    }

    fn load_velocity(&mut self, comps: &[Vec<Complex64>; 3]) {
        for i in 0..3 {
            pad3(&comps[i], self.n, &mut self.buf, self.m);
            self.fft.inverse(&mut self.buf);
            for (d, s) in self.u[i].iter_mut().zip(&self.buf) {
                *d = s.re;
            }
        }
    }

    /// `sum_j u_j d_j g(u_i)` on the padded grid, left in `acc`.
    fn advect_power<G: Fn(f64) -> f64>(&mut self, i: usize, g: &G) {
        let m = self.m;
        for (s, v) in self.spec.iter_mut().zip(&self.u[i]) {
            *s = Complex64::new(g(*v), 0.0);
        }
        self.fft.forward(&mut self.spec);
        for v in self.acc.iter_mut() {
            *v = 0.0;
        }
        for j in 0..3 {
            for (idx, (b, s)) in self.buf.iter_mut().zip(&self.spec).enumerate() {
                let k = wavevector(idx, m);
                // the padded Nyquist plane has no odd-derivative partner
                *b = if k[j] as i64 == -(m as i64 / 2) {
                    ZERO
                } else {
                    s * Complex64::new(0.0, k[j])
                };
            }
            self.fft.inverse(&mut self.buf);
            for ((a, b), uj) in self.acc.iter_mut().zip(&self.buf).zip(&self.u[j]) {
                *a += uj * b.re;
            }
        }
    }

    /// Unprojected `u . grad s(u_i)` for each component, truncated to `n^3`.
    pub fn nonlinear_into(
        &mut self,
        comps: &[Vec<Complex64>; 3],
        alpha: f64,
        out: &mut [Vec<Complex64>; 3],
    ) {
        self.load_velocity(comps);
        let e = alpha - 1.0;
        let g = |v: f64| signed_pow(v, e);
        for i in 0..3 {
            self.advect_power(i, &g);
            for (b, a) in self.buf.iter_mut().zip(&self.acc) {
                *b = Complex64::new(*a, 0.0);
            }
            self.fft.forward(&mut self.buf);
            truncate3(&self.buf, self.m, &mut out[i], self.n);
        }
    }

    /// `(sum_i int u_j d_j |u_i|^alpha, sum_i int |u_j d_j |u_i|^alpha|)`
    /// on the padded grid.
    pub fn cancellation(&mut self, comps: &[Vec<Complex64>; 3], alpha: f64) -> (f64, f64) {
        self.load_velocity(comps);
        let g = |v: f64| v.abs().powf(alpha);
        let cell = (BOX_LENGTH / self.m as f64).powi(3);
        let (mut value, mut scale) = (0.0, 0.0);
        for i in 0..3 {
            self.advect_power(i, &g);
            value += self.acc.iter().sum::<f64>() * cell;
            scale += self.acc.iter().map(|v| v.abs()).sum::<f64>() * cell;
        }
        (value, scale)
    }
}

/// `u . grad s(u_i)` for `i = 1, 2, 3` (not projected).
pub fn mns_nonlinearity(u: &VelocityField3D, alpha: f64) -> Result<[Vec<Complex64>; 3]> {
    if !(alpha > 1.0) {
        return Err(domain_err!("alpha = {alpha} must exceed 1"));
    }
    let n = u.side();
    let mut ws = MnsWorkspace::new(n)?;
    let mut out = [
        vec![ZERO; n * n * n],
        vec![ZERO; n * n * n],
        vec![ZERO; n * n * n],
    ];
    ws.nonlinear_into(u.components(), alpha, &mut out);
    Ok(out)
}

/// Pressure from `Delta Pi = -div N`, with `N` the unprojected nonlinearity.
pub fn pressure_from_nonlinearity(n: usize, nl: &[Vec<Complex64>; 3]) -> Result<PressureField3D> {
    let mut p = vec![ZERO; n * n * n];
    for (idx, v) in p.iter_mut().enumerate() {
        let k = wavevector(idx, n);
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if kk == 0.0 {
            continue;
        }
        let div =
            (nl[0][idx] * k[0] + nl[1][idx] * k[1] + nl[2][idx] * k[2]) * Complex64::new(0.0, 1.0);
        *v = div / kk;
    }
    PressureField3D::from_coeffs(n, p)
}

pub fn pressure(u: &VelocityField3D, alpha: f64) -> Result<PressureField3D> {
    let nl = mns_nonlinearity(u, alpha)?;
    pressure_from_nonlinearity(u.side(), &nl)
}

/// `int u_j d_j |u_i|^alpha` summed over `i`, and the matching absolute mass.
pub fn mns_cancellation(u: &VelocityField3D, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0) {
        return Err(domain_err!("alpha = {alpha} must exceed 1"));
    }
    Ok(MnsWorkspace::new(u.side())?.cancellation(u.components(), alpha))
}

/// Per-step `int |u|^2` and `int |grad u|^2`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MnsTrace {
    pub t0: f64,
    pub dt: f64,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
}

impl MnsTrace {
    /// `|E(T) + 2 int_0^T D - E(0)| / E(0)` over the whole trace, Simpson in time.
    pub fn energy_equality_residual(&self) -> f64 {
        if self.energy.is_empty() {
            return 0.0;
        }
        let e0 = self.energy[0];
        let e1 = self.energy[self.energy.len() - 1];
        let diss = simpson_uniform(self.dt, &self.dissipation);
        let r = (e1 + 2.0 * diss - e0).abs();
        if e0 > 0.0 {
            r / e0
        } else {
            r
        }
    }
}

/// Recorded velocity and pressure snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct MnsHistory {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub velocity: Vec<VelocityField3D>,
    pub pressure: Vec<PressureField3D>,
    pub trace: MnsTrace,
    /// Largest divergence defect seen after any step.
    pub max_divergence_defect: f64,
}

impl MnsHistory {
    pub fn side(&self) -> usize {
        self.velocity[0].side()
    }

    pub fn spacing(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MnsRunError {
    pub cause: Error,
    pub partial: Option<Box<MnsHistory>>,
}

impl core::fmt::Display for MnsRunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.cause.fmt(f)
    }
}

struct MnsStepper {
    n: usize,
    alpha: f64,
    ws: MnsWorkspace,
    coef: Coefficients,
    /// `|k|^2` of each flat index, used to look up coefficients.
    k2: Vec<usize>,
    nv: [Vec<Complex64>; 3],
    na: [Vec<Complex64>; 3],
    nb: [Vec<Complex64>; 3],
    nc: [Vec<Complex64>; 3],
    a: [Vec<Complex64>; 3],
    b: [Vec<Complex64>; 3],
    c: [Vec<Complex64>; 3],
}

fn zeros3(len: usize) -> [Vec<Complex64>; 3] {
    [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]]
}

impl MnsStepper {
    fn new(n: usize, alpha: f64, dt: f64) -> Result<Self> {
        let len = n * n * n;
        let k2: Vec<usize> = (0..len)
            .map(|idx| {
                let k = wavevector(idx, n);
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as usize
            })
            .collect();
        let kmax = k2.iter().copied().max().unwrap_or(0);
        let linear: Vec<f64> = (0..=kmax).map(|s| -(s as f64)).collect();
        Ok(Self {
            n,
            alpha,
            ws: MnsWorkspace::new(n)?,
            coef: Coefficients::new(&linear, dt),
            k2,
            nv: zeros3(len),
            na: zeros3(len),
            nb: zeros3(len),
            nc: zeros3(len),
            a: zeros3(len),
            b: zeros3(len),
            c: zeros3(len),
        })
    }

    /// `-P N(v)` into `out`.
    fn rhs(
        ws: &mut MnsWorkspace,
        alpha: f64,
        n: usize,
        v: &[Vec<Complex64>; 3],
        out: &mut [Vec<Complex64>; 3],
    ) {
        ws.nonlinear_into(v, alpha, out);
        leray_project(out, n);
        for c in out.iter_mut() {
            for z in c.iter_mut() {
                *z = -*z;
            }
        }
    }

    fn advance(&mut self, v: &mut [Vec<Complex64>; 3]) {
        let (n, alpha) = (self.n, self.alpha);
        let co = &self.coef;
        let k2 = &self.k2;
        Self::rhs(&mut self.ws, alpha, n, v, &mut self.nv);
        for c in 0..3 {
            for i in 0..v[c].len() {
                let s = k2[i];
                self.a[c][i] = v[c][i] * co.e2[s] + self.nv[c][i] * co.q[s];
            }
        }
        Self::rhs(&mut self.ws, alpha, n, &self.a, &mut self.na);
        for c in 0..3 {
            for i in 0..v[c].len() {
                let s = k2[i];
                self.b[c][i] = v[c][i] * co.e2[s] + self.na[c][i] * co.q[s];
            }
        }
        Self::rhs(&mut self.ws, alpha, n, &self.b, &mut self.nb);
        for c in 0..3 {
            for i in 0..v[c].len() {
                let s = k2[i];
                self.c[c][i] =
                    self.a[c][i] * co.e2[s] + (self.nb[c][i] * 2.0 - self.nv[c][i]) * co.q[s];
            }
        }
        Self::rhs(&mut self.ws, alpha, n, &self.c, &mut self.nc);
        for c in 0..3 {
            for i in 0..v[c].len() {
                let s = k2[i];
                v[c][i] = v[c][i] * co.e[s]
                    + self.nv[c][i] * co.f1[s]
                    + (self.na[c][i] + self.nb[c][i]) * (2.0 * co.f2[s])
                    + self.nc[c][i] * co.f3[s];
            }
        }
        // keep the discrete constraint exact against roundoff drift
        leray_project(v, n);
    }
}

fn is_bad(u: &VelocityField3D, ceiling: f64) -> bool {
    let mut bound = 0.0;
    for c in u.components() {
        for z in c {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return true;
            }
            bound += z.norm();
        }
    }
    bound > ceiling
}

/// Runs the configured problem, recording velocity and pressure snapshots.
pub fn mns_run(cfg: &MnsConfig) -> core::result::Result<MnsHistory, MnsRunError> {
    let fail = |cause| MnsRunError {
        cause,
        partial: None,
    };
    cfg.validate().map_err(fail)?;
    let steps = cfg.step_count().map_err(fail)?;
    let u0 = cfg.initial.build(cfg.n, cfg.seed).map_err(fail)?;
    let cfl = cfl_number(&u0, cfg.alpha, cfg.dt).map_err(fail)?;
    if cfl > 1.0 {
        return Err(fail(config_err!(
            "dt = {} violates the advective bound (CFL number {cfl:.3} > 1)",
            cfg.dt
        )));
    }
    let mut stepper = MnsStepper::new(cfg.n, cfg.alpha, cfg.dt).map_err(fail)?;
    let snapshot = |u: &VelocityField3D, ws: &mut MnsWorkspace| -> Result<PressureField3D> {
        let mut nl = zeros3(u.side().pow(3));
        ws.nonlinear_into(u.components(), cfg.alpha, &mut nl);
        pressure_from_nonlinearity(u.side(), &nl)
    };
    let mut hist = MnsHistory {
        alpha: cfg.alpha,
        times: vec![0.0],
        velocity: vec![u0.clone()],
        pressure: vec![snapshot(&u0, &mut stepper.ws).map_err(fail)?],
        trace: MnsTrace {
            t0: 0.0,
            dt: cfg.dt,
            energy: vec![u0.energy()],
            dissipation: vec![u0.dissipation()],
        },
        max_divergence_defect: u0.divergence_defect(),
    };
    let mut v = u0.components().clone();
    for s in 1..=steps {
        stepper.advance(&mut v);
        let t = s as f64 * cfg.dt;
        let u = VelocityField3D::from_parts_unchecked(cfg.n, v.clone());
        if is_bad(&u, cfg.sup_ceiling) {
            return Err(MnsRunError {
                cause: Error::BlowUpSuspected {
                    last_finite_time: t - cfg.dt,
                },
                partial: Some(Box::new(hist)),
            });
        }
        hist.trace.energy.push(u.energy());
        hist.trace.dissipation.push(u.dissipation());
        hist.max_divergence_defect = hist.max_divergence_defect.max(u.divergence_defect());
        if s % cfg.snapshot_stride == 0 {
            let p = snapshot(&u, &mut stepper.ws).map_err(fail)?;
            hist.times.push(t);
            hist.velocity.push(u);
            hist.pressure.push(p);
        }
    }
    Ok(hist)
}
