//! Experiment configuration, read from TOML and validated before any compute.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgm_core::cylinder::{Criterion, Resolution, Thresholds, DEFAULT_OVERSAMPLE};
use sgm_core::mns::{check_ladder, serrin_p_for, MnsConfig};
use sgm_core::sgm::{SolverConfig, ALPHA_CRITICAL};

use crate::error::{in_field, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Solve, store the history and evaluate the quantity ladders.
    SgmRun,
    /// Toy MNS solve with identity checks and optional Serrin monitor.
    MnsRun,
    /// Solve, then run the epsilon monitors over a lattice.
    Scan,
    /// Inequality suites over seeded runs.
    Inequalities,
    /// Solve, then compare quantities against rescaled copies.
    ScalingCheck,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::SgmRun => "sgm-run",
            Mode::MnsRun => "mns-run",
            Mode::Scan => "scan",
            Mode::Inequalities => "inequalities",
            Mode::ScalingCheck => "scaling-check",
        }
    }

    pub fn uses_sgm_solver(&self) -> bool {
        !matches!(self, Mode::MnsRun)
    }
}

fn default_radii() -> Vec<f64> {
    vec![0.6, 0.3, 0.15, 0.075]
}

fn default_p() -> f64 {
    3.0
}

fn default_oversample() -> usize {
    DEFAULT_OVERSAMPLE
}

fn default_criteria() -> Vec<Criterion> {
    Criterion::ALL.to_vec()
}

fn default_lambdas() -> Vec<u32> {
    vec![2, 4]
}

/// Monitor lattice: `nx` points across the period, `nt` times on `[t_lo, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub nx: usize,
    pub nt: usize,
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// Strictly decreasing radius ladder.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Ladder centers: `[x, t]` for surface growth, `[x, y, z, t]` for MNS.
    /// Empty means the middle of the slab, with only the radii that fit.
    #[serde(default)]
    pub centers: Vec<Vec<f64>>,
    /// Integrability exponent of `D_p`, `D_p_tilde` and `E_p`.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    /// Power-of-two scale factors for `scaling-check`.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<u32>,
    /// Spatial exponent of the Serrin monitor (MNS only).
    #[serde(default)]
    pub serrin_q: Option<f64>,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            radii: default_radii(),
            centers: Vec::new(),
            p: default_p(),
            oversample: default_oversample(),
            thresholds: Thresholds::default(),
            resolution: Resolution::default(),
            criteria: default_criteria(),
            lattice: None,
            lambdas: default_lambdas(),
            serrin_q: None,
        }
    }
}

/// Exponent of the Poincare check: a number or `alpha + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoincareExponent {
    Value(f64),
    Named(NamedExponent),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedExponent {
    #[serde(rename = "alpha+1")]
    AlphaPlusOne,
}

impl PoincareExponent {
    pub fn resolve(&self, alpha: f64) -> f64 {
        match self {
            PoincareExponent::Value(p) => *p,
            PoincareExponent::Named(NamedExponent::AlphaPlusOne) => alpha + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteCheck {
    Poincare,
    Inter1,
    Inter2,
    Inter3,
    Biharmonic,
    Cancellation,
}

impl SuiteCheck {
    pub const ALL: [SuiteCheck; 6] = [
        SuiteCheck::Poincare,
        SuiteCheck::Inter1,
        SuiteCheck::Inter2,
        SuiteCheck::Inter3,
        SuiteCheck::Biharmonic,
        SuiteCheck::Cancellation,
    ];
}

fn default_suite_alphas() -> Vec<f64> {
    vec![1.5, 2.0, 2.2]
}

fn default_runs() -> usize {
    10
}

fn default_cylinders() -> Vec<[f64; 3]> {
    vec![[3.0, 0.5, 0.8], [3.0, 0.5, 0.6], [3.0, 0.5, 0.4]]
}

fn default_exponents() -> Vec<PoincareExponent> {
    vec![
        PoincareExponent::Value(2.0),
        PoincareExponent::Named(NamedExponent::AlphaPlusOne),
    ]
}

fn half() -> f64 {
    0.5
}

fn default_window() -> [f64; 2] {
    [0.2, 0.8]
}

fn default_fields() -> usize {
    100
}

fn default_checks() -> Vec<SuiteCheck> {
    SuiteCheck::ALL.to_vec()
}

/// Inequality suite. The `solver` section is the template of every run;
/// alpha and seed are replaced per case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    #[serde(default = "default_suite_alphas")]
    pub alphas: Vec<f64>,
    /// Seeded runs per alpha.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Cylinders `[x0, t0, r]` for the Poincare and biharmonic checks.
    #[serde(default = "default_cylinders")]
    pub cylinders: Vec<[f64; 3]>,
    #[serde(default = "default_exponents")]
    pub poincare_p: Vec<PoincareExponent>,
    #[serde(default = "half")]
    pub theta1: f64,
    #[serde(default = "half")]
    pub theta2: f64,
    /// Time window of the interpolation checks, on the full period.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// Random fields per alpha for the cancellation check.
    #[serde(default = "default_fields")]
    pub cancellation_fields: usize,
    #[serde(default = "default_checks")]
    pub checks: Vec<SuiteCheck>,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            alphas: default_suite_alphas(),
            runs: default_runs(),
            cylinders: default_cylinders(),
            poincare_p: default_exponents(),
            theta1: half(),
            theta2: half(),
            window: default_window(),
            cancellation_fields: default_fields(),
            checks: default_checks(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mns: Option<MnsConfig>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteSpec>,
}

fn require(ok: bool, field: &str, msg: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::config(field, msg))
    }
}

/// Checks `alpha` against the admissible range `(1, 7/3)`.
pub fn check_sweep_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < ALPHA_CRITICAL {
        return Ok(());
    }
    let why = if (alpha - ALPHA_CRITICAL).abs() < 1e-12 {
        "alpha = 7/3 is the critical case, where existence of suitable weak solutions is open"
    } else {
        "alpha must lie strictly inside (1, 7/3); alpha = 7/3 is the open critical case"
    };
    Err(LabError::config("alpha", format!("alpha = {alpha}: {why}")))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let field = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    format!("line {line}")
                }
                None => "config".into(),
            };
            LabError::config(field, e.message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Config { field, msg } => LabError::Config {
                field: format!("{}: {field}", path.display()),
                msg,
            },
            other => other,
        })
    }

    pub fn solver(&self) -> Result<&SolverConfig> {
        self.solver
            .as_ref()
            .ok_or_else(|| LabError::config("solver", "missing [solver] section"))
    }

    pub fn mns(&self) -> Result<&MnsConfig> {
        self.mns
            .as_ref()
            .ok_or_else(|| LabError::config("mns", "missing [mns] section"))
    }

    /// Every documented precondition, checked before compute starts.
    pub fn validate(&self) -> Result<()> {
        let d = &self.diagnostics;
        require(!d.radii.is_empty(), "diagnostics.radii", "ladder is empty")?;
        require(
            d.radii.iter().all(|r| *r > 0.0 && r.is_finite()),
            "diagnostics.radii",
            "radii must be positive",
        )?;
        require(
            d.radii.windows(2).all(|w| w[1] < w[0]),
            "diagnostics.radii",
            "ladder must be strictly decreasing",
        )?;
        require(
            d.p >= 1.0,
            "diagnostics.p",
            format!("p = {} must be at least 1", d.p),
        )?;
        require(
            d.oversample >= 1,
            "diagnostics.oversample",
            "must be at least 1",
        )?;
        let th = &d.thresholds;
        require(
            th.eps01 > 0.0 && th.eps02 > 0.0 && th.eps03 > 0.0,
            "diagnostics.thresholds",
            "thresholds must be positive",
        )?;
        require(
            d.resolution.min_cells > 0.0,
            "diagnostics.resolution.min_cells",
            "must be positive",
        )?;
        match self.mode {
            Mode::MnsRun => self.validate_mns(),
            _ => self.validate_sgm(),
        }
    }

    fn validate_sgm(&self) -> Result<()> {
        let solver = self.solver()?;
        solver.validate().map_err(in_field("solver"))?;
        let d = &self.diagnostics;
        let length = solver.grid.length;
        let t_end = solver.t_end;
        for (i, c) in d.centers.iter().enumerate() {
            let field = format!("diagnostics.centers[{i}]");
            require(c.len() == 2, &field, "a center is [x, t]")?;
            let (t, r) = (c[1], d.radii[0]);
            require(
                t - r.powi(4) >= -1e-12 && t + r.powi(4) <= t_end + 1e-12,
                &field,
                format!("cylinder of radius {r} around t = {t} escapes [0, {t_end}]"),
            )?;
        }
        require(
            2.0 * d.radii[0] <= length,
            "diagnostics.radii",
            "largest radius exceeds half the period",
        )?;
        match self.mode {
            Mode::Scan => {
                require(
                    !d.criteria.is_empty(),
                    "diagnostics.criteria",
                    "scan needs at least one criterion",
                )?;
                if let Some(l) = &d.lattice {
                    require(
                        l.nx >= 1 && l.nt >= 1,
                        "diagnostics.lattice",
                        "empty lattice",
                    )?;
                    require(
                        l.t_lo <= l.t_hi && l.t_lo >= 0.0 && l.t_hi <= t_end,
                        "diagnostics.lattice",
                        format!("times must lie in [0, {t_end}]"),
                    )?;
                }
            }
            Mode::ScalingCheck => {
                require(
                    !d.lambdas.is_empty(),
                    "diagnostics.lambdas",
                    "no scale factors",
                )?;
                for l in &d.lambdas {
                    require(
                        l.is_power_of_two() && *l >= 2,
                        "diagnostics.lambdas",
                        format!("lambda = {l} must be a power of two, at least 2"),
                    )?;
                }
            }
            Mode::Inequalities => self.validate_suite(solver)?,
            _ => {}
        }
        Ok(())
    }

    fn validate_suite(&self, solver: &SolverConfig) -> Result<()> {
        let default = SuiteSpec::default();
        let s = self.suite.as_ref().unwrap_or(&default);
        require(!s.alphas.is_empty(), "suite.alphas", "no alphas")?;
        for a in &s.alphas {
            check_sweep_alpha(*a).map_err(|e| LabError::config("suite.alphas", e))?;
        }
        require(s.runs >= 1, "suite.runs", "need at least one run")?;
        require(
            s.theta1 > 0.0 && s.theta1 < 1.0,
            "suite.theta1",
            "must lie in (0, 1)",
        )?;
        require(
            s.theta2 > 0.0 && s.theta2 < 1.0,
            "suite.theta2",
            "must lie in (0, 1)",
        )?;
        for a in &s.alphas {
            for p in &s.poincare_p {
                require(
                    p.resolve(*a) >= 1.0,
                    "suite.poincare_p",
                    "exponents must be at least 1",
                )?;
            }
        }
        let t_end = solver.t_end;
        for (i, c) in s.cylinders.iter().enumerate() {
            let [x0, t0, r] = *c;
            let field = format!("suite.cylinders[{i}]");
            require(
                r > 0.0 && 2.0 * r <= solver.grid.length && x0.is_finite(),
                &field,
                "radius must be positive and at most half the period",
            )?;
            require(
                t0 - r.powi(4) >= -1e-12 && t0 + r.powi(4) <= t_end + 1e-12,
                &field,
                format!("time window escapes [0, {t_end}]"),
            )?;
        }
        let [a, b] = s.window;
        require(
            a >= 0.0 && b > a && b <= t_end + 1e-12,
            "suite.window",
            format!("need 0 <= t_lo < t_hi <= {t_end}"),
        )?;
        Ok(())
    }

    fn validate_mns(&self) -> Result<()> {
        let mns = self.mns()?;
        mns.validate().map_err(in_field("mns"))?;
        let d = &self.diagnostics;
        for (i, c) in d.centers.iter().enumerate() {
            let field = format!("diagnostics.centers[{i}]");
            require(c.len() == 4, &field, "an MNS center is [x, y, z, t]")?;
            let (t, r) = (c[3], d.radii[0]);
            require(
                t - r * r >= -1e-12 && t <= mns.t_end + 1e-12,
                &field,
                format!("window (t - r^2, t) escapes [0, {}]", mns.t_end),
            )?;
        }
        if let Some(q) = d.serrin_q {
            let alpha = mns.alpha;
            let p = serrin_p_for(q, alpha);
            match p {
                Some(p) => check_ladder(p, q, alpha).map_err(in_field("diagnostics.serrin_q"))?,
                None => {
                    return Err(LabError::config(
                        "diagnostics.serrin_q",
                        format!("q = {q} must exceed 3 alpha - 3 = {}", 3.0 * alpha - 3.0),
                    ))
                }
            }
        }
        Ok(())
    }
}
