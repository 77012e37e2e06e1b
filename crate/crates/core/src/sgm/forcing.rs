//! Forcing terms and initial data.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::rng;
use crate::spectral::{index_of_mode, periodic_offset, GridSpec1D, SpectralField1D};
use crate::testfn::bump_derivatives;

/// One travelling mode `amplitude * cos(kappa x + phase + frequency t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingMode {
    pub k: i64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub frequency: f64,
}

/// Localized pulse `amplitude * b((x - center)/width) * cos(frequency t)`,
/// `b(s) = exp(-1/(1-s^2))`, repeated periodically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingBump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
}

/// Right-hand side `f` of the equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingSpec {
    /// `f = 0`; with `alpha = 2` this is the conserved KPZ equation.
    #[default]
    Zero,
    Modes {
        modes: Vec<ForcingMode>,
        #[serde(default)]
        description: String,
    },
    Pointwise {
        bumps: Vec<ForcingBump>,
        #[serde(default)]
        description: String,
    },
}

impl ForcingSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            ForcingSpec::Zero => true,
            ForcingSpec::Modes { modes, .. } => modes.iter().all(|m| m.amplitude == 0.0),
            ForcingSpec::Pointwise { bumps, .. } => bumps.iter().all(|b| b.amplitude == 0.0),
        }
    }

    pub fn description(&self) -> &str {
        match self {
            ForcingSpec::Zero => "zero",
            ForcingSpec::Modes { description, .. } | ForcingSpec::Pointwise { description, .. } => {
                description
            }
        }
    }

    pub fn validate(&self, grid: &GridSpec1D) -> Result<()> {
        match self {
            ForcingSpec::Zero => Ok(()),
            ForcingSpec::Modes { modes, .. } => {
                for m in modes {
                    if m.k.unsigned_abs() as usize >= grid.n / 2 {
                        return Err(config_err!(
                            "forcing mode k = {} is not resolved by n = {}",
                            m.k,
                            grid.n
                        ));
                    }
                    if !(m.amplitude.is_finite() && m.phase.is_finite() && m.frequency.is_finite())
                    {
                        return Err(config_err!(
                            "forcing mode k = {} has a non-finite parameter",
                            m.k
                        ));
                    }
                }
                Ok(())
            }
            ForcingSpec::Pointwise { bumps, .. } => {
                for b in bumps {
                    if !(b.width > 0.0 && b.width <= 0.5 * grid.length) {
                        return Err(config_err!(
                            "forcing bump width {} must lie in (0, L/2]",
                            b.width
                        ));
                    }
                    if !(b.center.is_finite() && b.amplitude.is_finite() && b.frequency.is_finite())
                    {
                        return Err(config_err!("forcing bump has a non-finite parameter"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Forcing transform that can be evaluated cheaply at any time.
    pub fn prepare(&self, grid: &GridSpec1D) -> Result<PreparedForcing> {
        self.validate(grid)?;
        let mut parts = Vec::new();
        match self {
            ForcingSpec::Zero => {}
            ForcingSpec::Modes { modes, .. } => {
                for m in modes {
                    let mut c = vec![Complex64::new(0.0, 0.0); grid.n];
                    let mut s = c.clone();
                    // A cos(kx + p + wt) = Re(e^{iwt}) * A cos(kx + p) - Im(e^{iwt}) * A sin(kx + p)
                    add_cosine(&mut c, grid.n, m.k, m.amplitude, m.phase);
                    add_cosine(&mut s, grid.n, m.k, m.amplitude, m.phase - 0.5 * PI);
                    parts.push(ForcingPart {
                        frequency: m.frequency,
                        cos_part: c,
                        sin_part: Some(s),
                    });
                }
            }
            ForcingSpec::Pointwise { bumps, .. } => {
                for b in bumps {
                    let samples: Vec<f64> = grid
                        .nodes()
                        .iter()
                        .map(|&x| {
                            let d = periodic_offset(x, b.center, grid.length);
                            b.amplitude * bump_derivatives(d / b.width)[0]
                        })
                        .collect();
                    let field = SpectralField1D::forward(*grid, &samples)?;
                    parts.push(ForcingPart {
                        frequency: b.frequency,
                        cos_part: field.coeffs().to_vec(),
                        sin_part: None,
                    });
                }
            }
        }
        Ok(PreparedForcing { n: grid.n, parts })
    }

    /// Forcing of the rescaled solution `h_lambda`: the same shape seen at
    /// `lambda x`, `lambda^4 t`, with amplitude multiplied by `amp_factor`.
    /// `lambda` must be a positive integer so that the profile stays periodic.
    pub fn rescaled(&self, lambda: u32, amp_factor: f64, length: f64) -> ForcingSpec {
        let l = lambda as f64;
        let l4 = l * l * l * l;
        match self {
            ForcingSpec::Zero => ForcingSpec::Zero,
            ForcingSpec::Modes { modes, description } => ForcingSpec::Modes {
                modes: modes
                    .iter()
                    .map(|m| ForcingMode {
                        k: m.k * lambda as i64,
                        amplitude: m.amplitude * amp_factor,
                        phase: m.phase,
                        frequency: m.frequency * l4,
                    })
                    .collect(),
                description: description.clone(),
            },
            ForcingSpec::Pointwise { bumps, description } => {
                let mut out = Vec::with_capacity(bumps.len() * lambda as usize);
                for b in bumps {
                    for j in 0..lambda {
                        out.push(ForcingBump {
                            center: (b.center + j as f64 * length) / l,
                            width: b.width / l,
                            amplitude: b.amplitude * amp_factor,
                            frequency: b.frequency * l4,
                        });
                    }
                }
                ForcingSpec::Pointwise {
                    bumps: out,
                    description: description.clone(),
                }
            }
        }
    }
}

fn add_cosine(c: &mut [Complex64], n: usize, k: i64, amplitude: f64, phase: f64) {
    if k == 0 {
        c[0] += Complex64::new(amplitude * phase.cos(), 0.0);
        return;
    }
    let z = Complex64::from_polar(0.5 * amplitude, phase);
    // cos(kx + p) with k < 0 equals cos(|k|x - p)
    let (k, z) = if k < 0 { (-k, z.conj()) } else { (k, z) };
    let jp = index_of_mode(k, n).expect("validated");
    let jm = index_of_mode(-k, n).expect("validated");
    c[jp] += z;
    c[jm] += z.conj();
}

#[derive(Debug, Clone)]
struct ForcingPart {
    frequency: f64,
    cos_part: Vec<Complex64>,
    sin_part: Option<Vec<Complex64>>,
}

/// Spatial forcing profiles with their temporal factors.
#[derive(Debug, Clone)]
pub struct PreparedForcing {
    n: usize,
    parts: Vec<ForcingPart>,
}

impl PreparedForcing {
    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Writes the coefficients of `f(., t)` into `out`.
    pub fn coeffs_at(&self, t: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.n);
        for v in out.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        for p in &self.parts {
            let (c, s) = ((p.frequency * t).cos(), (p.frequency * t).sin());
            for (o, a) in out.iter_mut().zip(p.cos_part.iter()) {
                *o += a * c;
            }
            if let Some(sp) = &p.sin_part {
                for (o, b) in out.iter_mut().zip(sp.iter()) {
                    *o -= b * s;
                }
            }
        }
    }

    /// Adds `f(., t)` to `out`.
    pub fn add_to(&self, t: f64, out: &mut [Complex64]) {
        for p in &self.parts {
            let (c, s) = ((p.frequency * t).cos(), (p.frequency * t).sin());
            for (o, a) in out.iter_mut().zip(p.cos_part.iter()) {
                *o += a * c;
            }
            if let Some(sp) = &p.sin_part {
                for (o, b) in out.iter_mut().zip(sp.iter()) {
                    *o -= b * s;
                }
            }
        }
    }
}

/// One Fourier mode of explicit initial data, `amplitude * cos(kappa x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialMode {
    pub k: i64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Initial height profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Modes {
        modes: Vec<InitialMode>,
        #[serde(default)]
        mean: f64,
    },
    /// Modes `kmin..=kmax` with seeded uniform phases and magnitudes
    /// `|c_k| ~ 1/kappa^2`, scaled so that the `Hdot^2` norm equals `h2_norm`.
    RandomPhases {
        kmin: u32,
        kmax: u32,
        h2_norm: f64,
        #[serde(default)]
        mean: f64,
    },
}

impl InitialSpec {
    pub fn sine(k: i64, amplitude: f64) -> Self {
        InitialSpec::Modes {
            modes: vec![InitialMode {
                k,
                amplitude,
                phase: -0.5 * PI,
            }],
            mean: 0.0,
        }
    }

    pub fn validate(&self, grid: &GridSpec1D) -> Result<()> {
        let half = (grid.n / 2) as i64;
        match self {
            InitialSpec::Modes { modes, mean } => {
                if !mean.is_finite() {
                    return Err(config_err!("initial mean must be finite"));
                }
                for m in modes {
                    if m.k.abs() >= half {
                        return Err(config_err!(
                            "initial mode k = {} is not resolved by n = {}",
                            m.k,
                            grid.n
                        ));
                    }
                    if !(m.amplitude.is_finite() && m.phase.is_finite()) {
                        return Err(config_err!(
                            "initial mode k = {} has a non-finite parameter",
                            m.k
                        ));
                    }
                }
                Ok(())
            }
            InitialSpec::RandomPhases {
                kmin,
                kmax,
                h2_norm,
                mean,
            } => {
                if *kmin < 1 || kmin > kmax || (*kmax as i64) >= half {
                    return Err(config_err!(
                        "random initial band {kmin}..={kmax} must satisfy 1 <= kmin <= kmax < n/2 = {half}"
                    ));
                }
                if !(*h2_norm >= 0.0 && h2_norm.is_finite() && mean.is_finite()) {
                    return Err(config_err!(
                        "random initial data needs a finite h2_norm >= 0"
                    ));
                }
                Ok(())
            }
        }
    }

    /// Builds the initial field; random phases come from stream 0 of `seed`.
    pub fn build(&self, grid: &GridSpec1D, seed: u64) -> Result<SpectralField1D> {
        self.validate(grid)?;
        let mut c = vec![Complex64::new(0.0, 0.0); grid.n];
        match self {
            InitialSpec::Modes { modes, mean } => {
                c[0] += Complex64::new(*mean, 0.0);
                for m in modes {
                    add_cosine(&mut c, grid.n, m.k, m.amplitude, m.phase);
                }
            }
            InitialSpec::RandomPhases {
                kmin,
                kmax,
                h2_norm,
                mean,
            } => {
                let mut r = rng::stream(seed, 0);
                let count = (kmax - kmin + 1) as f64;
                let amp = h2_norm / (2.0 * grid.length * count).sqrt();
                c[0] = Complex64::new(*mean, 0.0);
                for k in *kmin..=*kmax {
                    let kappa = 2.0 * PI * k as f64 / grid.length;
                    let phase = rng::uniform(&mut r, 0.0, 2.0 * PI);
                    // |c_k| = amp / kappa^2 and the full cosine has amplitude 2|c_k|
                    add_cosine(&mut c, grid.n, k as i64, 2.0 * amp / (kappa * kappa), phase);
                }
            }
        }
        SpectralField1D::from_coeffs(*grid, c)
    }
}
