//! Periodic 3D spectral fields on the `(2 pi)^3` box.
//!
//! Storage is `[(ix * n + iy) * n + iz]` with every axis in FFT order.
//! Velocity fields never carry Nyquist content; it is cleared on every
//! construction so the padded products stay exact.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{config_err, Result};
use crate::fft::{next_supported_len, FftPlan};
use crate::spectral::{index_of_mode, mode_of_index};

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Side length of the periodic box.
pub const BOX_LENGTH: f64 = 2.0 * PI;

/// Accepted mode counts per axis for 3D fields.
pub fn check_side(n: usize) -> Result<()> {
    if n < 8 || n > 64 || !n.is_power_of_two() {
        return Err(config_err!(
            "3D mode count {n} must be a power of two in [8, 64]"
        ));
    }
    Ok(())
}

/// Padded transform size for `n` modes per axis.
pub fn padded_side(n: usize) -> usize {
    next_supported_len((3 * n).div_ceil(2))
}

/// Separable 3D transform built from 1D plans.
#[derive(Debug, Clone)]
pub struct Fft3 {
    n: usize,
    plan: FftPlan,
    line: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            plan: FftPlan::new(n)?,
            line: vec![ZERO; n],
        })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    fn along_axes(&mut self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "3D FFT buffer length mismatch");
        for stride in [1, n, n * n] {
            for base in 0..n * n {
                // base enumerates the two axes other than the transformed one
                let start = match stride {
                    1 => base * n,
                    s if s == n => (base / n) * n * n + base % n,
                    _ => base,
                };
                for (k, v) in self.line.iter_mut().enumerate() {
                    *v = data[start + k * stride];
                }
                if forward {
                    self.plan.forward(&mut self.line);
                } else {
                    self.plan.inverse(&mut self.line);
                }
                for (k, v) in self.line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }

    /// Forward transform normalized by `1/n^3`.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.along_axes(data, true);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.along_axes(data, false);
    }
}

/// Integer wavevector of flat index `idx` on an `n^3` grid.
#[inline]
pub fn wavevector(idx: usize, n: usize) -> [f64; 3] {
    let iz = idx % n;
    let iy = (idx / n) % n;
    let ix = idx / (n * n);
    [
        mode_of_index(ix, n) as f64,
        mode_of_index(iy, n) as f64,
        mode_of_index(iz, n) as f64,
    ]
}

#[inline]
fn is_nyquist(idx: usize, n: usize) -> bool {
    let h = n / 2;
    idx % n == h || (idx / n) % n == h || idx / (n * n) == h
}

/// Copies the retained modes of an `n^3` spectrum into a zeroed `m^3` one.
pub(crate) fn pad3(src: &[Complex64], n: usize, dst: &mut [Complex64], m: usize) {
    for v in dst.iter_mut() {
        *v = ZERO;
    }
    for (idx, c) in src.iter().enumerate() {
        if is_nyquist(idx, n) {
            continue;
        }
        let k = wavevector(idx, n);
        let map =
            |k: f64| index_of_mode(k as i64, m).expect("padded grid holds every retained mode");
        dst[(map(k[0]) * m + map(k[1])) * m + map(k[2])] = *c;
    }
}

/// Keeps modes of an `m^3` spectrum representable on `n^3`, Nyquist cleared.
pub(crate) fn truncate3(src: &[Complex64], m: usize, dst: &mut [Complex64], n: usize) {
    for (idx, d) in dst.iter_mut().enumerate() {
        if is_nyquist(idx, n) {
            *d = ZERO;
            continue;
        }
        let k = wavevector(idx, n);
        let map =
            |k: f64| index_of_mode(k as i64, m).expect("padded grid holds every retained mode");
        *d = src[(map(k[0]) * m + map(k[1])) * m + map(k[2])];
    }
}

/// Real samples of an `n^3` spectrum on an `m^3` grid (`m >= n`).
pub fn sample3(coeffs: &[Complex64], n: usize, m: usize) -> Result<Vec<f64>> {
    if m < n {
        return Err(config_err!("cannot sample {n}^3 modes on a {m}^3 grid"));
    }
    let mut buf = vec![ZERO; m * m * m];
    pad3(coeffs, n, &mut buf, m);
    Fft3::new(m)?.inverse(&mut buf);
    Ok(buf.iter().map(|c| c.re).collect())
}

/// Spectrum of real samples on an `m^3` grid truncated to `n^3` modes.
pub fn analyze3(samples: &[f64], m: usize, n: usize) -> Result<Vec<Complex64>> {
    if samples.len() != m * m * m || m < n {
        return Err(config_err!(
            "{} samples do not form a {m}^3 grid",
            samples.len()
        ));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Fft3::new(m)?.forward(&mut buf);
    let mut out = vec![ZERO; n * n * n];
    truncate3(&buf, m, &mut out, n);
    Ok(out)
}

/// Solenoidal velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField3D {
    n: usize,
    comps: [Vec<Complex64>; 3],
}

impl VelocityField3D {
    pub fn zeros(n: usize) -> Result<Self> {
        check_side(n)?;
        let z = vec![ZERO; n * n * n];
        Ok(Self {
            n,
            comps: [z.clone(), z.clone(), z],
        })
    }

    /// Wraps coefficients; Nyquist content is dropped and the field is
    /// Leray-projected.
    pub fn from_coeffs(n: usize, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        check_side(n)?;
        if comps.iter().any(|c| c.len() != n * n * n) {
            return Err(config_err!("component length does not match {n}^3"));
        }
        let mut u = Self { n, comps };
        u.clear_nyquist();
        u.project();
        Ok(u)
    }

    /// Transforms physical samples on the native `n^3` grid.
    pub fn from_samples(n: usize, samples: [&[f64]; 3]) -> Result<Self> {
        check_side(n)?;
        let c0 = analyze3(samples[0], n, n)?;
        let c1 = analyze3(samples[1], n, n)?;
        let c2 = analyze3(samples[2], n, n)?;
        Self::from_coeffs(n, [c0, c1, c2])
    }

    /// Builds from a pointwise function evaluated on the native grid.
    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(n: usize, f: F) -> Result<Self> {
        check_side(n)?;
        let h = BOX_LENGTH / n as f64;
        let mut s = [
            vec![0.0; n * n * n],
            vec![0.0; n * n * n],
            vec![0.0; n * n * n],
        ];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let v = f([ix as f64 * h, iy as f64 * h, iz as f64 * h]);
                    let idx = (ix * n + iy) * n + iz;
                    for c in 0..3 {
                        s[c][idx] = v[c];
                    }
                }
            }
        }
        Self::from_samples(n, [&s[0], &s[1], &s[2]])
    }

    /// `A (sin x cos y cos z, -cos x sin y cos z, 0)`.
    pub fn taylor_green(n: usize, amplitude: f64) -> Result<Self> {
        Self::from_fn(n, |[x, y, z]| {
            [
                amplitude * x.sin() * y.cos() * z.cos(),
                -amplitude * x.cos() * y.sin() * z.cos(),
                0.0,
            ]
        })
    }

    pub(crate) fn from_parts_unchecked(n: usize, comps: [Vec<Complex64>; 3]) -> Self {
        Self { n, comps }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    fn clear_nyquist(&mut self) {
        let n = self.n;
        for c in self.comps.iter_mut() {
            for (idx, v) in c.iter_mut().enumerate() {
                if is_nyquist(idx, n) {
                    *v = ZERO;
                }
            }
        }
    }

    /// Leray projection `u - k (k . u) / |k|^2`; the mean flow is kept.
    pub fn project(&mut self) {
        leray_project(&mut self.comps, self.n);
    }

    /// `int |u|^2`.
    pub fn energy(&self) -> f64 {
        let vol = BOX_LENGTH.powi(3);
        vol * self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
    }

    /// `int |grad u|^2`.
    pub fn dissipation(&self) -> f64 {
        let vol = BOX_LENGTH.powi(3);
        let mut acc = 0.0;
        for c in &self.comps {
            for (idx, z) in c.iter().enumerate() {
                let k = wavevector(idx, self.n);
                acc += (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * z.norm_sqr();
            }
        }
        vol * acc
    }

    /// Largest `|k . u(k)| / (|k| |u(k)|)` over nonzero modes.
    pub fn divergence_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.n * self.n * self.n {
            let k = wavevector(idx, self.n);
            let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            let u = [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]];
            let mag = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
            if kk == 0.0 || mag == 0.0 {
                continue;
            }
            let div = u[0] * k[0] + u[1] * k[1] + u[2] * k[2];
            worst = worst.max(div.norm() / (kk * mag));
        }
        worst
    }

    /// Largest `|u(-k) - conj(u(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let scale = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for c in &self.comps {
            for (idx, z) in c.iter().enumerate() {
                let k = wavevector(idx, n);
                let mirror = |k: f64| ((n as i64 - k as i64) as usize) % n;
                let j = (mirror(k[0]) * n + mirror(k[1])) * n + mirror(k[2]);
                worst = worst.max((c[j] - z.conj()).norm());
            }
        }
        worst / scale
    }

    /// Physical samples of each component on an `m^3` grid.
    pub fn samples(&self, m: usize) -> Result<[Vec<f64>; 3]> {
        Ok([
            sample3(&self.comps[0], self.n, m)?,
            sample3(&self.comps[1], self.n, m)?,
            sample3(&self.comps[2], self.n, m)?,
        ])
    }

    /// Samples of `d_j u_i` on an `m^3` grid, indexed `[i][j]`.
    pub fn gradient_samples(&self, m: usize) -> Result<[[Vec<f64>; 3]; 3]> {
        let mut out: [[Vec<f64>; 3]; 3] = Default::default();
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let d: Vec<Complex64> = self.comps[i]
                    .iter()
                    .enumerate()
                    .map(|(idx, z)| z * Complex64::new(0.0, wavevector(idx, self.n)[j]))
                    .collect();
                *slot = sample3(&d, self.n, m)?;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
        out
    }
}

pub(crate) fn leray_project(comps: &mut [Vec<Complex64>; 3], n: usize) {
    for idx in 0..n * n * n {
        let k = wavevector(idx, n);
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if kk == 0.0 {
            continue;
        }
        let div = comps[0][idx] * k[0] + comps[1][idx] * k[1] + comps[2][idx] * k[2];
        for c in 0..3 {
            comps[c][idx] -= div * (k[c] / kk);
        }
    }
}

/// Mean-free scalar pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField3D {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl PressureField3D {
    pub fn zeros(n: usize) -> Result<Self> {
        check_side(n)?;
        Ok(Self {
            n,
            coeffs: vec![ZERO; n * n * n],
        })
    }

    /// Wraps coefficients, removing the mean.
    pub fn from_coeffs(n: usize, mut coeffs: Vec<Complex64>) -> Result<Self> {
        check_side(n)?;
        if coeffs.len() != n * n * n {
            return Err(config_err!("pressure length does not match {n}^3"));
        }
        coeffs[0] = ZERO;
        Ok(Self { n, coeffs })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn samples(&self, m: usize) -> Result<Vec<f64>> {
        sample3(&self.coeffs, self.n, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_roundtrip_and_normalization() {
        let n = 8;
        let mut f = Fft3::new(n).unwrap();
        let h = BOX_LENGTH / n as f64;
        let mut buf: Vec<Complex64> = (0..n * n * n)
            .map(|idx| {
                let (x, y, z) = (
                    (idx / 64) as f64 * h,
                    ((idx / 8) % 8) as f64 * h,
                    (idx % 8) as f64 * h,
                );
                Complex64::new((x + 2.0 * y).cos() + z.sin(), 0.0)
            })
            .collect();
        let orig = buf.clone();
        f.forward(&mut buf);
        // cos(x + 2y) puts 1/2 at (1, 2, 0) and (-1, -2, 0)
        assert!((buf[(1 * 8 + 2) * 8].re - 0.5).abs() < 1e-14);
        assert!((buf[(7 * 8 + 6) * 8].re - 0.5).abs() < 1e-14);
        assert!((buf[1].im + 0.5).abs() < 1e-14);
        f.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_green_is_solenoidal_with_known_energy() {
        let u = VelocityField3D::taylor_green(16, 1.0).unwrap();
        assert!(u.divergence_defect() < 1e-14);
        assert!(u.hermitian_defect() < 1e-14);
        // int |u|^2 = (2 pi)^3 / 4 and int |grad u|^2 = 3 (2 pi)^3 / 4
        let vol = BOX_LENGTH.powi(3);
        assert!((u.energy() - vol / 4.0).abs() < 1e-12 * vol);
        assert!((u.dissipation() - 0.75 * vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn projection_removes_gradient_part() {
        // u = grad(sin x cos y) is pure gradient
        let u =
            VelocityField3D::from_fn(16, |[x, y, _]| [x.cos() * y.cos(), -x.sin() * y.sin(), 0.0])
                .unwrap();
        assert!(u.energy() < 1e-25);
    }
}
