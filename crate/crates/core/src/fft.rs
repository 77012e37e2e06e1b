//! Mixed radix-2/3 complex FFT.
//!
//! Sizes of the form `2^a * 3^b` are supported, which covers power-of-two
//! grids and their 3/2-padded companions. The forward transform carries the
//! `1/n` normalization so that coefficients are `(1/n) sum_j x_j e^{-2 pi i jk/n}`;
//! the inverse is the plain synthesis sum.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{config_err, Result};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

/// Precomputed factorization and twiddles for one transform length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    factors: Vec<usize>,
    twiddles: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// True when `len` factors into powers of two and three only.
pub fn is_supported_len(len: usize) -> bool {
    if len == 0 {
        return false;
    }
    let mut m = len;
    while m % 2 == 0 {
        m /= 2;
    }
    while m % 3 == 0 {
        m /= 3;
    }
    m == 1
}

/// Smallest supported length that is at least `min_len`.
pub fn next_supported_len(min_len: usize) -> usize {
    let mut m = min_len.max(1);
    while !is_supported_len(m) {
        m += 1;
    }
    m
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if !is_supported_len(len) {
            return Err(config_err!("FFT length {len} is not of the form 2^a 3^b"));
        }
        let mut factors = Vec::new();
        let mut m = len;
        // radix-2 stages first keeps the radix-3 combines at the leaves short
        while m % 2 == 0 {
            factors.push(2);
            m /= 2;
        }
        while m % 3 == 0 {
            factors.push(3);
            m /= 3;
        }
        let twiddles = (0..len)
            .map(|j| {
                let theta = -2.0 * PI * (j as f64) / (len as f64);
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Ok(Self {
            len,
            factors,
            twiddles,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform with `1/n` normalization.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len, "FFT buffer length mismatch");
        self.scratch.copy_from_slice(data);
        transform(
            &self.scratch,
            1,
            data,
            self.len,
            &self.factors,
            &self.twiddles,
            1,
        );
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// In-place inverse (synthesis) transform, no normalization.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len, "FFT buffer length mismatch");
        for (s, d) in self.scratch.iter_mut().zip(data.iter()) {
            *s = d.conj();
        }
        transform(
            &self.scratch,
            1,
            data,
            self.len,
            &self.factors,
            &self.twiddles,
            1,
        );
        for v in data.iter_mut() {
            *v = v.conj();
        }
    }
}

/// Recursive decimation-in-time. `input` is read with `stride`, `out` receives
/// the `n`-point DFT in natural order.
fn transform(
    input: &[Complex64],
    stride: usize,
    out: &mut [Complex64],
    n: usize,
    factors: &[usize],
    twiddles: &[Complex64],
    tw_stride: usize,
) {
    if n == 1 {
        out[0] = input[0];
        return;
    }
    let p = factors[0];
    let m = n / p;
    for q in 0..p {
        transform(
            &input[q * stride..],
            stride * p,
            &mut out[q * m..(q + 1) * m],
            m,
            &factors[1..],
            twiddles,
            tw_stride * p,
        );
    }
    match p {
        2 => {
            for k in 0..m {
                let w = twiddles[k * tw_stride];
                let a = out[k];
                let b = out[k + m] * w;
                out[k] = a + b;
                out[k + m] = a - b;
            }
        }
        3 => {
            // W_3 = exp(-2 pi i / 3)
            let c = -0.5;
            let s = -(3.0f64).sqrt() * 0.5;
            for k in 0..m {
                let a = out[k];
                let b = out[k + m] * twiddles[k * tw_stride];
                let d = out[k + 2 * m] * twiddles[2 * k * tw_stride];
                let sum = b + d;
                let diff = b - d;
                let rot = Complex64::new(-diff.im * s, diff.re * s);
                let base = a + sum * c;
                out[k] = a + sum;
                out[k + m] = base + rot;
                out[k + 2 * m] = base - rot;
            }
        }
        _ => unreachable!("only radix 2 and 3 are planned"),
    }
}
