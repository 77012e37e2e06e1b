//! Periodic Fourier representation of 1D fields.
//!
//! Coefficients follow `c_k = (1/n) sum_j f(x_j) e^{-i kappa_k x_j}` with
//! `kappa_k = 2 pi k / L`; on the `2 pi` torus this is the `(1/2 pi) int`
//! convention. Storage is FFT order: index `j` holds mode `j` for `j < n/2`
//! and mode `j - n` otherwise, so the Nyquist mode `-n/2` sits at index `n/2`.
//!
//! Norms use the physical measure: `int_0^L |f|^2 dx = L sum_k |c_k|^2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, domain_err, Result};
use crate::fft::{next_supported_len, FftPlan};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Padding ratio used for dealiased products, `num/den` in `[3/2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadFactor {
    pub num: u32,
    pub den: u32,
}

impl PadFactor {
    pub const THREE_HALVES: PadFactor = PadFactor { num: 3, den: 2 };
    pub const TWO: PadFactor = PadFactor { num: 2, den: 1 };

    pub fn validate(&self) -> Result<()> {
        if self.den == 0 {
            return Err(config_err!("pad factor denominator is zero"));
        }
        // 3/2 <= num/den <= 2, compared in integers
        let (n, d) = (self.num as u64, self.den as u64);
        if 2 * n < 3 * d || n > 2 * d {
            return Err(config_err!(
                "pad factor {}/{} outside [3/2, 2]",
                self.num,
                self.den
            ));
        }
        Ok(())
    }

    /// Padded transform length for `n` retained modes.
    pub fn padded_len(&self, n: usize) -> usize {
        let num = self.num as usize;
        let den = self.den as usize;
        next_supported_len((n * num).div_ceil(den))
    }
}

impl Default for PadFactor {
    fn default() -> Self {
        Self::THREE_HALVES
    }
}

/// Grid of a periodic 1D field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec1D {
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default)]
    pub pad: PadFactor,
}

fn default_length() -> f64 {
    2.0 * PI
}

impl GridSpec1D {
    /// Grid on the `2 pi` torus with 3/2 padding.
    pub fn torus(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI, PadFactor::THREE_HALVES)
    }

    pub fn new(n: usize, length: f64, pad: PadFactor) -> Result<Self> {
        let g = Self { n, length, pad };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(config_err!(
                "mode count {} must be a power of two and at least 8",
                self.n
            ));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(config_err!(
                "domain length {} must be positive",
                self.length
            ));
        }
        self.pad.validate()
    }

    pub fn padded_len(&self) -> usize {
        self.pad.padded_len(self.n)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Physical wavenumber `2 pi k / L` of storage index `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * mode_of_index(j, self.n) as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|j| j as f64 * dx).collect()
    }
}

/// Signed mode number of FFT-order index `j` on an `n`-point grid.
pub fn mode_of_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT-order index of signed mode `k`, if it is representable.
pub fn index_of_mode(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k >= half || k < -half {
        None
    } else if k >= 0 {
        Some(k as usize)
    } else {
        Some((k + n as i64) as usize)
    }
}

/// Displacement `x - center` reduced to the nearest periodic image, in `[-L/2, L/2]`.
#[inline]
pub fn periodic_offset(x: f64, center: f64, length: f64) -> f64 {
    let d = x - center;
    d - length * (d / length).round()
}

/// Selects `H^s` or the homogeneous `Hdot^s` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub homogeneous: bool,
}

impl SobolevIndex {
    pub fn inhomogeneous(s: f64) -> Self {
        Self {
            s,
            homogeneous: false,
        }
    }

    pub fn homogeneous(s: f64) -> Self {
        Self {
            s,
            homogeneous: true,
        }
    }
}

/// Real periodic field stored as Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField1D {
    grid: GridSpec1D,
    coeffs: Vec<Complex64>,
}

impl SpectralField1D {
    pub fn zeros(grid: GridSpec1D) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.n],
        }
    }

    /// Wraps FFT-ordered coefficients; Hermitian symmetry is enforced.
    pub fn from_coeffs(grid: GridSpec1D, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if coeffs.len() != grid.n {
            return Err(config_err!(
                "{} coefficients supplied for a grid of {} modes",
                coeffs.len(),
                grid.n
            ));
        }
        let mut f = Self { grid, coeffs };
        f.symmetrize();
        Ok(f)
    }

    /// Transforms physical samples. Accepts either `n` samples on the
    /// native grid or `padded_len` samples, in which case the result is
    /// truncated to the modes `|k| < n/2`.
    pub fn forward(grid: GridSpec1D, samples: &[f64]) -> Result<Self> {
        grid.validate()?;
        let m = samples.len();
        let padded = grid.padded_len();
        if m != grid.n && m != padded {
            return Err(config_err!(
                "sample count {m} matches neither n = {} nor the padded size {padded}",
                grid.n
            ));
        }
        let mut plan = FftPlan::new(m)?;
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        plan.forward(&mut buf);
        let mut f = Self::zeros(grid);
        if m == grid.n {
            // native samples keep their Nyquist content so the transform inverts exactly
            f.coeffs.copy_from_slice(&buf);
        } else {
            truncate_into(&buf, &mut f.coeffs);
        }
        f.symmetrize();
        Ok(f)
    }

    /// Physical samples on the native `n`-point grid.
    pub fn inverse(&self) -> Vec<f64> {
        self.sample(self.grid.n)
    }

    /// Physical samples on an `m`-point grid (`m >= n`, `m` of the form `2^a 3^b`).
    pub fn sample(&self, m: usize) -> Vec<f64> {
        assert!(
            m >= self.grid.n,
            "cannot sample below the native resolution"
        );
        let mut plan = FftPlan::new(m).expect("sample size must factor into 2s and 3s");
        let mut buf = vec![ZERO; m];
        pad_into(&self.coeffs, &mut buf);
        plan.inverse(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of signed mode `k`; zero outside the representable band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        index_of_mode(k, self.grid.n).map_or(ZERO, |j| self.coeffs[j])
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Restores `c_{-k} = conj(c_k)` and a real Nyquist coefficient.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n;
        self.coeffs[0].im = 0.0;
        self.coeffs[n / 2].im = 0.0;
        for j in 1..n / 2 {
            let a = self.coeffs[j];
            let b = self.coeffs[n - j];
            let avg = (a + b.conj()) * 0.5;
            self.coeffs[j] = avg;
            self.coeffs[n - j] = avg.conj();
        }
    }

    /// Largest violation of Hermitian symmetry, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for j in 1..n / 2 {
            worst = worst.max((self.coeffs[j] - self.coeffs[n - j].conj()).norm());
        }
        worst / scale
    }

    /// Spectral derivative of the given order. The Nyquist mode is dropped
    /// for odd orders, where `(ik)^m` would make it imaginary.
    pub fn derivative(&self, order: u32) -> Self {
        let mut out = self.clone();
        apply_derivative(&self.grid, &mut out.coeffs, order);
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= factor;
        }
        out
    }

    /// Sum of two fields on the same grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(config_err!("cannot add fields on different grids"));
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b;
        }
        Ok(out)
    }

    /// `int_0^L |f|^2 dx` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.length * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Sobolev norm with weights `1 + |kappa|^{2s}` (or `|kappa|^{2s}` for the
    /// homogeneous variant, which drops `k = 0`). At `s = 0` the inhomogeneous
    /// weight is 1 so that `H^0` coincides with `L^2`.
    pub fn sobolev_norm(&self, idx: SobolevIndex) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let kappa = self.grid.wavenumber(j).abs();
            let w = if idx.homogeneous {
                if j == 0 {
                    0.0
                } else {
                    kappa.powf(2.0 * idx.s)
                }
            } else if idx.s == 0.0 {
                1.0
            } else {
                1.0 + kappa.powf(2.0 * idx.s)
            };
            acc += w * c.norm_sqr();
        }
        (self.grid.length * acc).sqrt()
    }

    /// Evaluates the trigonometric polynomial at an arbitrary point.
    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.grid.n;
        let theta = 2.0 * PI * x / self.grid.length;
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut rot = step;
        let mut acc = self.coeffs[0].re;
        for j in 1..n / 2 {
            acc += 2.0 * (self.coeffs[j] * rot).re;
            rot *= step;
        }
        // Nyquist contributes its real part times cos(n/2 theta)
        let ny = self.coeffs[n / 2].re;
        if ny != 0.0 {
            acc += ny * (theta * (n / 2) as f64).cos();
        }
        acc
    }

    /// Value, first and second derivative at an arbitrary point.
    pub fn evaluate_jet(&self, x: f64) -> [f64; 3] {
        let n = self.grid.n;
        let base = 2.0 * PI / self.grid.length;
        let theta = base * x;
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut rot = step;
        let mut out = [self.coeffs[0].re, 0.0, 0.0];
        for j in 1..n / 2 {
            let kappa = base * j as f64;
            let z = 2.0 * self.coeffs[j] * rot;
            out[0] += z.re;
            out[1] -= kappa * z.im;
            out[2] -= kappa * kappa * z.re;
            rot *= step;
        }
        let ny = self.coeffs[n / 2].re;
        if ny != 0.0 {
            let kappa = base * (n / 2) as f64;
            let c = (theta * (n / 2) as f64).cos();
            out[0] += ny * c;
            out[2] -= kappa * kappa * ny * c;
        }
        out
    }

    /// Same field on a grid with `n_new >= n` modes, coefficients reindexed.
    pub fn refine(&self, n_new: usize) -> Result<Self> {
        let grid = GridSpec1D::new(n_new, self.grid.length, self.grid.pad)?;
        if n_new < self.grid.n {
            return Err(config_err!(
                "refine target {n_new} is coarser than {}",
                self.grid.n
            ));
        }
        let mut out = Self::zeros(grid);
        let n = self.grid.n;
        for j in 0..n {
            let k = mode_of_index(j, n);
            if k == -((n / 2) as i64) {
                // split the Nyquist coefficient symmetrically onto +-n/2
                let half = self.coeffs[j] * 0.5;
                out.coeffs[n / 2] = half;
                out.coeffs[n_new - n / 2] = half;
                continue;
            }
            let idx = index_of_mode(k, n_new).expect("refined grid holds all modes");
            out.coeffs[idx] = self.coeffs[j];
        }
        Ok(out)
    }
}

/// Multiplies FFT-ordered coefficients by `(i kappa)^order`.
pub(crate) fn apply_derivative(grid: &GridSpec1D, coeffs: &mut [Complex64], order: u32) {
    if order == 0 {
        return;
    }
    let n = grid.n;
    for (j, c) in coeffs.iter_mut().enumerate() {
        let kappa = grid.wavenumber(j);
        *c *= ik_pow(kappa, order);
    }
    if order % 2 == 1 {
        coeffs[n / 2] = ZERO;
    }
}

/// `(i kappa)^order` without going through complex `powi`.
pub(crate) fn ik_pow(kappa: f64, order: u32) -> Complex64 {
    let mag = kappa.powi(order as i32);
    match order % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Copies retained FFT-ordered modes into a larger zero-filled buffer.
/// The Nyquist coefficient is split evenly between `+-n/2` to keep the
/// padded signal real.
pub(crate) fn pad_into(coeffs: &[Complex64], buf: &mut [Complex64]) {
    let n = coeffs.len();
    let m = buf.len();
    for v in buf.iter_mut() {
        *v = ZERO;
    }
    if m == n {
        buf.copy_from_slice(coeffs);
        return;
    }
    buf[..n / 2].copy_from_slice(&coeffs[..n / 2]);
    buf[m - n / 2 + 1..].copy_from_slice(&coeffs[n / 2 + 1..]);
    let ny = coeffs[n / 2] * 0.5;
    buf[n / 2] = ny;
    buf[m - n / 2] = ny;
}

/// Keeps the modes `|k| < n/2` of a padded spectrum and zeroes the Nyquist slot.
pub(crate) fn truncate_into(buf: &[Complex64], coeffs: &mut [Complex64]) {
    let n = coeffs.len();
    let m = buf.len();
    if m == n {
        coeffs.copy_from_slice(buf);
        coeffs[n / 2] = ZERO;
        return;
    }
    coeffs[..n / 2].copy_from_slice(&buf[..n / 2]);
    coeffs[n / 2] = ZERO;
    coeffs[n / 2 + 1..].copy_from_slice(&buf[m - n / 2 + 1..]);
}

/// `sign(s) |s|^p`, exact for `p = 1`.
#[inline]
pub fn signed_pow(s: f64, p: f64) -> f64 {
    if p == 1.0 {
        s
    } else {
        s.signum() * s.abs().powf(p)
    }
}

/// Reusable buffers and plans for the dealiased nonlinearity on one grid.
#[derive(Debug, Clone)]
pub struct SpectralWorkspace {
    grid: GridSpec1D,
    plan_pad: FftPlan,
    buf: Vec<Complex64>,
    deriv2: Vec<Complex64>,
}

impl SpectralWorkspace {
    pub fn new(grid: GridSpec1D) -> Result<Self> {
        grid.validate()?;
        let m = grid.padded_len();
        let deriv2 = (0..grid.n)
            .map(|j| {
                let k = grid.wavenumber(j);
                Complex64::new(-k * k, 0.0)
            })
            .collect();
        Ok(Self {
            grid,
            plan_pad: FftPlan::new(m)?,
            buf: vec![ZERO; m],
            deriv2,
        })
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    /// Writes the coefficients of `d_xx |h_x|^alpha` into `out`.
    ///
    /// Pipeline: spectral `d_x`, zero-pad, inverse transform, pointwise
    /// `|.|^alpha`, forward transform, truncate (Nyquist zeroed), spectral `d_xx`.
    pub fn nonlinear_into(&mut self, h: &[Complex64], alpha: f64, out: &mut [Complex64]) {
        let n = self.grid.n;
        debug_assert_eq!(h.len(), n);
        out.copy_from_slice(h);
        apply_derivative(&self.grid, out, 1);
        pad_into(out, &mut self.buf);
        self.plan_pad.inverse(&mut self.buf);
        if alpha == 2.0 {
            for v in self.buf.iter_mut() {
                *v = Complex64::new(v.re * v.re, 0.0);
            }
        } else {
            for v in self.buf.iter_mut() {
                *v = Complex64::new(v.re.abs().powf(alpha), 0.0);
            }
        }
        self.plan_pad.forward(&mut self.buf);
        truncate_into(&self.buf, out);
        for (c, d) in out.iter_mut().zip(self.deriv2.iter()) {
            *c *= d;
        }
    }

    /// Physical values of `(i kappa)^order h` on the padded grid.
    pub fn padded_values(&mut self, h: &[Complex64], order: u32) -> Vec<f64> {
        let mut tmp = h.to_vec();
        apply_derivative(&self.grid, &mut tmp, order);
        pad_into(&tmp, &mut self.buf);
        self.plan_pad.inverse(&mut self.buf);
        self.buf.iter().map(|c| c.re).collect()
    }
}

/// `d_xx |h_x|^alpha` evaluated pseudo-spectrally with padding.
pub fn nonlinear_term(h: &SpectralField1D, alpha: f64) -> Result<SpectralField1D> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(domain_err!(
            "nonlinearity exponent alpha = {alpha} must exceed 1"
        ));
    }
    let mut ws = SpectralWorkspace::new(h.grid)?;
    let mut out = SpectralField1D::zeros(h.grid);
    ws.nonlinear_into(&h.coeffs, alpha, &mut out.coeffs);
    out.symmetrize();
    Ok(out)
}
