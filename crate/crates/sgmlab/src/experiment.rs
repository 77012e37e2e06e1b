//! One configured experiment: solve, store, diagnose, index.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sgm_core::cylinder::{
    scaling_transform, scan_point, summarize_scan, Criterion, Lattice, ParabolicCylinder,
    SampledHistory, ScanConfig, Verdict,
};
use sgm_core::dimension::{
    hardcoded_exponent, mns_hardcoded_exponent, singular_set_exponent, QuantityId, Rational,
};
use sgm_core::inequality::{
    cancellation_scale, check_biharmonic_smoothing, check_cancellation, check_interpolation,
    check_poincare, inputs_digest, InequalityVerdict, Interpolation, SlabWindow, SuiteSummary,
};
use sgm_core::mns::{
    mns_cancellation, mns_quantity, mns_run, serrin_monitor, serrin_p_for, MnsCylinder, MnsHistory,
    MnsQuantityId, MNS_OVERSAMPLE,
};
use sgm_core::quad::log_log_fit;
use sgm_core::rng::case_seed;
use sgm_core::sgm::{
    energy_residual, run, ForcingSpec, InitialSpec, SolverConfig, SpaceTimeHistory,
};
use sgm_core::Error as CoreError;

use crate::artifacts::{num, ArtifactDir, Manifest, ManifestKind, Status};
use crate::config::{Diagnostics, ExperimentConfig, Mode, SuiteCheck, SuiteSpec};
use crate::error::{exit, LabError, Result};
use crate::snapshot::{write_mns_history, write_sgm_history};

pub const QUANTITY_HEADER: [&str; 5] = ["x0", "t0", "r", "quantity_id", "value"];

/// Stream offset of the cancellation fields, clear of the run streams.
const CANCELLATION_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub exit_code: u8,
}

/// How a mode ended, short of an error.
enum Ended {
    Complete,
    Partial(String),
}

/// Runs `cfg` into `out`. Failures after the directory exists still
/// produce a manifest (status `partial` or `failed`) next to whatever was written.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, force: bool) -> Result<Outcome> {
    cfg.validate()?;
    let mut dir = ArtifactDir::create(out, force)?;
    let result = match cfg.mode {
        Mode::SgmRun => sgm_run(cfg, &mut dir),
        Mode::Scan => scan(cfg, &mut dir),
        Mode::ScalingCheck => scaling_check(cfg, &mut dir),
        Mode::Inequalities => inequalities(cfg, &mut dir),
        Mode::MnsRun => mns(cfg, &mut dir),
    };
    let (status, error, code) = match result {
        Ok(Ended::Complete) => (Status::Complete, None, exit::OK),
        Ok(Ended::Partial(msg)) => (Status::Partial, Some(msg), exit::BLOW_UP),
        Err(e @ (LabError::Io { .. } | LabError::Format { .. })) => return Err(e),
        Err(e) => (Status::Failed, Some(e.to_string()), e.exit_code()),
    };
    let root = dir.root().to_path_buf();
    let manifest = dir.finish(ManifestKind::Experiment, cfg, None, status, error)?;
    Ok(Outcome {
        dir: root,
        manifest,
        exit_code: code,
    })
}

/// Exact `alpha` for the exponent tables, when it is a modest fraction.
pub fn exact_alpha(alpha: f64) -> Option<Rational> {
    let q = Rational::approximate_float(alpha)?;
    (*q.denom() <= 1_000_000 && (*q.numer() as f64 / *q.denom() as f64 - alpha).abs() <= 1e-12)
        .then_some(q)
}

fn solve(
    solver: &SolverConfig,
    dir: &mut ArtifactDir,
) -> Result<(SpaceTimeHistory, Option<String>)> {
    let (hist, partial) = match run(solver) {
        Ok(h) => (h, None),
        Err(e) => match (e.cause, e.partial) {
            (cause @ CoreError::BlowUpSuspected { .. }, Some(p)) => (*p, Some(cause.to_string())),
            (cause, _) => return Err(cause.into()),
        },
    };
    let written = write_sgm_history(&dir.path("history"), &hist)?;
    dir.record(written);
    if let Some(tr) = hist.trace() {
        let rows = (0..tr.len()).map(|i| {
            [
                num(tr.t0 + i as f64 * tr.dt),
                num(tr.l2_sq[i]),
                num(tr.hxx_sq[i]),
                num(tr.forcing_work[i]),
            ]
        });
        dir.csv("trace.csv", &["t", "l2_sq", "hxx_sq", "forcing_work"], rows)?;
    }
    Ok((hist, partial))
}

/// Ladder centers with the radii used at each. Without configured centers
/// the middle of the slab is used with the radii whose cylinders fit.
fn sgm_centers(hist: &SpaceTimeHistory, d: &Diagnostics) -> Vec<(f64, f64, Vec<f64>)> {
    if !d.centers.is_empty() {
        return d
            .centers
            .iter()
            .map(|c| (c[0], c[1], d.radii.clone()))
            .collect();
    }
    if hist.len() < 2 {
        return Vec::new();
    }
    let half = 0.5 * (hist.t_last() - hist.t_first());
    let length = hist.grid().length;
    let radii: Vec<f64> = d
        .radii
        .iter()
        .copied()
        .filter(|r| r.powi(4) <= half && 2.0 * r <= length)
        .collect();
    if radii.is_empty() {
        return Vec::new();
    }
    vec![(0.5 * length, hist.t_first() + half, radii)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSummary {
    pub x0: f64,
    pub t0: f64,
    pub quantity_id: String,
    pub scaling_exponent: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log value` against `log r` over positive values.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub fit_residual: Option<f64>,
}

pub fn fit_ladder(radii: &[f64], values: &[f64]) -> Option<sgm_core::quad::LineFit> {
    let (rs, vs): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(r, v)| (*r, *v))
        .unzip();
    if rs.len() < 2 {
        return None;
    }
    log_log_fit(&rs, &vs)
}

fn ladders(
    hist: &SpaceTimeHistory,
    sampled: &SampledHistory,
    d: &Diagnostics,
    dir: &mut ArtifactDir,
) -> Result<Vec<LadderSummary>> {
    let jobs: Vec<(f64, f64, Vec<f64>, QuantityId)> = sgm_centers(hist, d)
        .into_iter()
        .flat_map(|(x, t, radii)| {
            QuantityId::all(d.p)
                .into_iter()
                .map(move |id| (x, t, radii.clone(), id))
        })
        .collect();
    let reports = jobs
        .par_iter()
        .map(|(x, t, radii, id)| sampled.report(*x, *t, radii, *id))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut out = Vec::with_capacity(reports.len());
    for rep in reports {
        let label = rep.id.label();
        for (r, v) in rep.radii.iter().zip(&rep.values) {
            rows.push([num(rep.x0), num(rep.t0), num(*r), label.clone(), num(*v)]);
        }
        let fit = fit_ladder(&rep.radii, &rep.values);
        out.push(LadderSummary {
            x0: rep.x0,
            t0: rep.t0,
            quantity_id: label,
            scaling_exponent: rep.scaling_exponent,
            radii: rep.radii,
            values: rep.values,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            fit_residual: fit.map(|f| f.residual),
        });
    }
    dir.csv("quantities.csv", &QUANTITY_HEADER, rows)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub quantity_id: String,
    pub exponent: f64,
    /// Exact value as a fraction, when alpha is a modest fraction.
    pub exact: Option<String>,
}

/// Normalizing exponents of all nine quantities plus the singular-set exponent.
pub fn exponent_table(alpha: f64, p: f64) -> Vec<ExponentRow> {
    let qa = exact_alpha(alpha);
    let qp = exact_alpha(p);
    let mut rows: Vec<ExponentRow> = QuantityId::all(p)
        .iter()
        .map(|id| ExponentRow {
            quantity_id: id.label(),
            exponent: id.exponent(alpha),
            exact: qa
                .zip(qp)
                .and_then(|(a, p)| hardcoded_exponent(id.kind(), a, p).ok())
                .map(|e| e.to_string()),
        })
        .collect();
    rows.push(ExponentRow {
        quantity_id: "singular_set".into(),
        exponent: sgm_core::dimension::singular_set_exponent_f64(alpha),
        exact: qa
            .and_then(|a| singular_set_exponent(a).ok())
            .map(|e| e.to_string()),
    });
    rows
}

fn write_exponents(dir: &mut ArtifactDir, rows: &[ExponentRow]) -> Result<()> {
    dir.csv(
        "exponents.csv",
        &["quantity_id", "exponent", "exact"],
        rows.iter().map(|r| {
            [
                r.quantity_id.clone(),
                num(r.exponent),
                r.exact.clone().unwrap_or_default(),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: String,
    pub alpha: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
    /// Global energy balance defect over the recorded horizon.
    pub energy_residual: Option<f64>,
    pub singular_set_exponent: f64,
    pub exponents: Vec<ExponentRow>,
    pub ladders: Vec<LadderSummary>,
}

fn run_summary(
    cfg: &ExperimentConfig,
    hist: &SpaceTimeHistory,
    ladders: Vec<LadderSummary>,
) -> Result<RunSummary> {
    let solver = cfg.solver()?;
    let energy = if hist.len() > 1 {
        Some(energy_residual(hist, hist.t_first(), hist.t_last())?)
    } else {
        None
    };
    Ok(RunSummary {
        mode: cfg.mode.name().into(),
        alpha: solver.alpha,
        n: solver.grid.n,
        dt: solver.dt,
        t_end: solver.t_end,
        snapshots: hist.len(),
        energy_residual: energy,
        singular_set_exponent: sgm_core::dimension::singular_set_exponent_f64(solver.alpha),
        exponents: exponent_table(solver.alpha, cfg.diagnostics.p),
        ladders,
    })
}

fn sgm_run(cfg: &ExperimentConfig, dir: &mut ArtifactDir) -> Result<Ended> {
    let (hist, partial) = solve(cfg.solver()?, dir)?;
    if let Some(msg) = partial {
        return Ok(Ended::Partial(msg));
    }
    let d = &cfg.diagnostics;
    let sampled = SampledHistory::new(&hist, d.oversample)?;
    let lad = ladders(&hist, &sampled, d, dir)?;
    let summary = run_summary(cfg, &hist, lad)?;
    write_exponents(dir, &summary.exponents)?;
    dir.json("summary.json", &summary)?;
    Ok(Ended::Complete)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRate {
    pub criterion: Criterion,
    pub regular: usize,
    pub points: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub run: RunSummary,
    pub points: usize,
    pub undetermined: usize,
    pub box_dimension: Option<f64>,
    pub target_dimension: f64,
    pub note: String,
    pub pass_rates: Vec<CriterionRate>,
}

fn default_lattice(hist: &SpaceTimeHistory, d: &Diagnostics) -> Lattice {
    let (a, b) = (hist.t_first(), hist.t_last());
    let margin = d.radii[0].powi(4);
    let mid = 0.5 * (a + b);
    let lo = (a + margin).min(mid);
    let hi = (b - margin).max(mid);
    Lattice::uniform(hist.grid().length, 8, lo, hi, 3)
}

fn scan(cfg: &ExperimentConfig, dir: &mut ArtifactDir) -> Result<Ended> {
    let (hist, partial) = solve(cfg.solver()?, dir)?;
    if let Some(msg) = partial {
        return Ok(Ended::Partial(msg));
    }
    let d = &cfg.diagnostics;
    let sampled = SampledHistory::new(&hist, d.oversample)?;
    let lad = ladders(&hist, &sampled, d, dir)?;
    let lattice = match &d.lattice {
        Some(l) => Lattice::uniform(hist.grid().length, l.nx, l.t_lo, l.t_hi, l.nt),
        None => default_lattice(&hist, d),
    };
    let sc = ScanConfig {
        lattice,
        radii: d.radii.clone(),
        criteria: d.criteria.clone(),
        thresholds: d.thresholds,
        resolution: d.resolution,
    };
    let centers: Vec<(f64, f64)> = sc
        .lattice
        .ts
        .iter()
        .flat_map(|&t| sc.lattice.xs.iter().map(move |&x| (x, t)))
        .collect();
    let points = centers
        .par_iter()
        .map(|&(x, t)| scan_point(&sampled, &sc, x, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let report = summarize_scan(points, hist.alpha(), hist.grid().length);

    let mut values = Vec::new();
    let mut verdicts = Vec::new();
    for p in &report.points {
        for v in &p.verdicts {
            let label = v.criterion.quantity().label();
            for ((r, val), ok) in v.radii.iter().zip(&v.values).zip(&v.resolved) {
                if *ok {
                    values.push([num(v.x), num(v.t), num(*r), label.clone(), num(*val)]);
                }
            }
            verdicts.push([
                num(v.x),
                num(v.t),
                v.criterion.name().to_string(),
                num(v.threshold),
                verdict_name(v.verdict).to_string(),
            ]);
        }
    }
    dir.csv("monitor.csv", &QUANTITY_HEADER, values)?;
    dir.csv(
        "verdicts.csv",
        &["x0", "t0", "criterion", "threshold", "verdict"],
        verdicts,
    )?;
    let pass_rates = sc
        .criteria
        .iter()
        .map(|c| {
            let regular = report
                .points
                .iter()
                .flat_map(|p| p.verdicts.iter())
                .filter(|v| v.criterion == *c && v.verdict == Verdict::RegularIndicated)
                .count();
            let n = report.points.len();
            CriterionRate {
                criterion: *c,
                regular,
                points: n,
                rate: if n > 0 {
                    regular as f64 / n as f64
                } else {
                    0.0
                },
            }
        })
        .collect();
    let run = run_summary(cfg, &hist, lad)?;
    write_exponents(dir, &run.exponents)?;
    let summary = ScanSummary {
        run,
        points: report.points.len(),
        undetermined: report.undetermined,
        box_dimension: report.box_dimension,
        target_dimension: report.target_dimension,
        note: report.note.clone(),
        pass_rates,
    };
    dir.json("summary.json", &summary)?;
    Ok(Ended::Complete)
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::RegularIndicated => "REGULAR-INDICATED",
        Verdict::Undetermined => "UNDETERMINED",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleComparison {
    pub lambda: u32,
    pub x0: f64,
    pub t0: f64,
    pub r: f64,
    pub quantity_id: String,
    pub value: f64,
    pub scaled_value: f64,
    /// `|Q - Q_lambda| / max(Q, 1e-12)`.
    pub rel_err: f64,
}

/// Compares every quantity on the resolved radii against the rescaled
/// history evaluated on the rescaled cylinder.
pub fn compare_scaling(
    hist: &SpaceTimeHistory,
    d: &Diagnostics,
    lambda: u32,
) -> Result<Vec<ScaleComparison>> {
    let l = lambda as f64;
    let scaled = scaling_transform(hist, l)?;
    let a = SampledHistory::new(hist, d.oversample)?;
    let b = SampledHistory::new(&scaled, d.oversample)?;
    let mut jobs = Vec::new();
    for (x0, t0, radii) in sgm_centers(hist, d) {
        for r in radii {
            if a.resolvable(&ParabolicCylinder::new(x0, t0, r), &d.resolution) {
                for id in QuantityId::all(d.p) {
                    jobs.push((x0, t0, r, id));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(x0, t0, r, id)| {
            let q = a.quantity(&ParabolicCylinder::new(x0, t0, r), id)?;
            let cyl = ParabolicCylinder::new(x0 / l, t0 / l.powi(4), r / l);
            let qs = b.quantity(&cyl, id)?;
            Ok(ScaleComparison {
                lambda,
                x0,
                t0,
                r,
                quantity_id: id.label(),
                value: q,
                scaled_value: qs,
                rel_err: (q - qs).abs() / q.max(1e-12),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub lambda: u32,
    pub comparisons: usize,
    pub max_rel_err: f64,
}

fn scaling_check(cfg: &ExperimentConfig, dir: &mut ArtifactDir) -> Result<Ended> {
    let (hist, partial) = solve(cfg.solver()?, dir)?;
    if let Some(msg) = partial {
        return Ok(Ended::Partial(msg));
    }
    let d = &cfg.diagnostics;
    let mut rows = Vec::new();
    let mut per = Vec::new();
    for &lambda in &d.lambdas {
        let cmp = compare_scaling(&hist, d, lambda)?;
        per.push(ScalingSummary {
            lambda,
            comparisons: cmp.len(),
            max_rel_err: cmp.iter().fold(0.0, |m, c| m.max(c.rel_err)),
        });
        rows.extend(cmp);
    }
    dir.csv(
        "scaling.csv",
        &[
            "x0",
            "t0",
            "r",
            "quantity_id",
            "value",
            "lambda",
            "scaled_value",
            "rel_err",
        ],
        rows.iter().map(|c| {
            [
                num(c.x0),
                num(c.t0),
                num(c.r),
                c.quantity_id.clone(),
                num(c.value),
                c.lambda.to_string(),
                num(c.scaled_value),
                num(c.rel_err),
            ]
        }),
    )?;
    dir.json("summary.json", &per)?;
    Ok(Ended::Complete)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCase {
    pub alpha: f64,
    pub case: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub alpha: f64,
    pub case: usize,
    pub seed: u64,
    pub x0: f64,
    pub t0: f64,
    pub r: f64,
    pub p: Option<f64>,
    pub verdict: InequalityVerdict,
}

/// Enumerated cases: run `i` of alpha `a` uses stream `a * runs + i` of the base seed.
pub fn suite_cases(suite: &SuiteSpec, base_seed: u64) -> Vec<SuiteCase> {
    let mut out = Vec::new();
    for (ai, &alpha) in suite.alphas.iter().enumerate() {
        for i in 0..suite.runs {
            out.push(SuiteCase {
                alpha,
                case: i,
                seed: case_seed(base_seed, (ai * suite.runs + i) as u64),
            });
        }
    }
    out
}

fn keypoin(v: &InequalityVerdict) -> Option<InequalityVerdict> {
    let get = |name: &str| v.terms.iter().find(|t| t.name == name).map(|t| t.value);
    let (lhs, rhs, ratio) = (
        get("keypoin_lhs")?,
        get("keypoin_rhs_unit")?,
        get("keypoin_ratio")?,
    );
    Some(InequalityVerdict {
        check: "keypoin".into(),
        lhs,
        rhs_unit: rhs,
        ratio,
        terms: Vec::new(),
        inputs_digest: v.inputs_digest.clone(),
    })
}

/// Every check of one seeded case.
pub fn run_case(
    template: &SolverConfig,
    suite: &SuiteSpec,
    case: &SuiteCase,
) -> Result<Vec<SuiteRow>> {
    let mut cfg = template.clone();
    cfg.alpha = case.alpha;
    cfg.seed = case.seed;
    let wants = |c: SuiteCheck| suite.checks.contains(&c);
    let mut rows = Vec::new();
    let mut push = |x0: f64, t0: f64, r: f64, p: Option<f64>, v: InequalityVerdict| {
        rows.push(SuiteRow {
            alpha: case.alpha,
            case: case.case,
            seed: case.seed,
            x0,
            t0,
            r,
            p,
            verdict: v,
        })
    };
    let nonlinear = [
        SuiteCheck::Poincare,
        SuiteCheck::Inter1,
        SuiteCheck::Inter2,
        SuiteCheck::Inter3,
    ];
    if nonlinear.iter().any(|c| wants(*c)) {
        let hist = run(&cfg).map_err(|e| LabError::Core(e.cause))?;
        if wants(SuiteCheck::Poincare) {
            for &[x0, t0, r] in &suite.cylinders {
                for pe in &suite.poincare_p {
                    let p = pe.resolve(case.alpha);
                    let cyl = ParabolicCylinder::new(x0, t0, r);
                    let v = check_poincare(&hist, &cyl, suite.theta1, p)?;
                    let k = keypoin(&v);
                    push(x0, t0, r, Some(p), v);
                    if let Some(k) = k {
                        push(x0, t0, r, Some(p), k);
                    }
                }
            }
        }
        let [a, b] = suite.window;
        let full = SlabWindow::full_period(cfg.grid.length, a, b);
        for which in Interpolation::ALL {
            let check = match which {
                Interpolation::Inter1 => SuiteCheck::Inter1,
                Interpolation::Inter2 => SuiteCheck::Inter2,
                Interpolation::Inter3 => SuiteCheck::Inter3,
            };
            if !wants(check) {
                continue;
            }
            let v = check_interpolation(&hist, &full, which)?;
            push(full.x0, 0.5 * (a + b), full.r, None, v);
            if which != Interpolation::Inter1 {
                for &[x0, t0, r] in &suite.cylinders {
                    let w = SlabWindow::from(ParabolicCylinder::new(x0, t0, r));
                    push(x0, t0, r, None, check_interpolation(&hist, &w, which)?);
                }
            }
        }
    }
    if wants(SuiteCheck::Biharmonic) {
        let mut lin = cfg.clone();
        lin.linear_only = true;
        lin.forcing = ForcingSpec::Zero;
        let hist = run(&lin).map_err(|e| LabError::Core(e.cause))?;
        for &[x0, t0, r] in &suite.cylinders {
            let cyl = ParabolicCylinder::new(x0, t0, r);
            push(
                x0,
                t0,
                r,
                None,
                check_biharmonic_smoothing(&hist, &cyl, suite.theta2)?,
            );
        }
    }
    Ok(rows)
}

/// Cancellation on seeded random fields; field `j` of alpha `a` uses
/// stream `2^40 + a * fields + j`.
pub fn cancellation_rows(
    template: &SolverConfig,
    suite: &SuiteSpec,
    base_seed: u64,
) -> Result<Vec<SuiteRow>> {
    let grid = template.grid;
    let kmax = (grid.n / 4).max(1) as u32;
    let jobs: Vec<(usize, f64, usize)> = suite
        .alphas
        .iter()
        .enumerate()
        .flat_map(|(ai, &a)| (0..suite.cancellation_fields).map(move |j| (ai, a, j)))
        .collect();
    jobs.par_iter()
        .map(|&(ai, alpha, j)| {
            let seed = case_seed(
                base_seed,
                CANCELLATION_STREAM + (ai * suite.cancellation_fields + j) as u64,
            );
            let spec = InitialSpec::RandomPhases {
                kmin: 1,
                kmax,
                h2_norm: 1.0,
                mean: 0.0,
            };
            let h = spec.build(&grid, seed)?;
            let value = check_cancellation(&h, alpha);
            let scale = cancellation_scale(&h, alpha);
            let frozen = SpaceTimeHistory::frozen(&h, alpha, 0.0, 1.0, 2)?;
            let v = InequalityVerdict {
                check: "cancellation".into(),
                lhs: value.abs(),
                rhs_unit: scale,
                ratio: if scale > 0.0 {
                    value.abs() / scale
                } else {
                    0.0
                },
                terms: vec![sgm_core::inequality::Term {
                    name: "signed_value".into(),
                    value,
                }],
                inputs_digest: inputs_digest(&frozen, "cancellation", &[alpha]),
            };
            Ok(SuiteRow {
                alpha,
                case: j,
                seed,
                x0: 0.0,
                t0: 0.0,
                r: 0.5 * grid.length,
                p: None,
                verdict: v,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteLine {
    pub check: String,
    pub alpha: Option<f64>,
    #[serde(flatten)]
    pub summary: SuiteSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySummary {
    pub n: usize,
    pub dt: f64,
    pub by_alpha: Vec<SuiteLine>,
    pub by_check: Vec<SuiteLine>,
}

/// Reduces suite rows to per-(check, alpha) and per-check maxima, in first-seen order.
pub fn summarize_suite(rows: &[SuiteRow], n: usize, dt: f64) -> InequalitySummary {
    let mut by_alpha: Vec<SuiteLine> = Vec::new();
    let mut by_check: Vec<SuiteLine> = Vec::new();
    for row in rows {
        let v = &row.verdict;
        let line = match by_alpha
            .iter_mut()
            .position(|l| l.check == v.check && l.alpha == Some(row.alpha))
        {
            Some(i) => &mut by_alpha[i],
            None => {
                by_alpha.push(SuiteLine {
                    check: v.check.clone(),
                    alpha: Some(row.alpha),
                    summary: SuiteSummary::default(),
                });
                by_alpha.last_mut().expect("just pushed")
            }
        };
        line.summary.add(v);
        let line = match by_check.iter_mut().position(|l| l.check == v.check) {
            Some(i) => &mut by_check[i],
            None => {
                by_check.push(SuiteLine {
                    check: v.check.clone(),
                    alpha: None,
                    summary: SuiteSummary::default(),
                });
                by_check.last_mut().expect("just pushed")
            }
        };
        line.summary.add(v);
    }
    InequalitySummary {
        n,
        dt,
        by_alpha,
        by_check,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SuiteManifest {
    base_seed: u64,
    alphas: Vec<f64>,
    runs: usize,
    n: usize,
    dt: f64,
    t_end: f64,
    cases: Vec<SuiteCase>,
    cancellation_fields: usize,
    cancellation_stream_offset: u64,
}

/// Runs a whole suite and returns the rows in case order.
pub fn run_suite(template: &SolverConfig, suite: &SuiteSpec) -> Result<Vec<SuiteRow>> {
    let cases = suite_cases(suite, template.seed);
    let per_case = cases
        .par_iter()
        .map(|c| run_case(template, suite, c))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<SuiteRow> = per_case.into_iter().flatten().collect();
    if suite.checks.contains(&SuiteCheck::Cancellation) {
        rows.extend(cancellation_rows(template, suite, template.seed)?);
    }
    Ok(rows)
}

fn inequalities(cfg: &ExperimentConfig, dir: &mut ArtifactDir) -> Result<Ended> {
    let template = cfg.solver()?;
    let default = SuiteSpec::default();
    let suite = cfg.suite.as_ref().unwrap_or(&default);
    dir.json(
        "suite_manifest.json",
        &SuiteManifest {
            base_seed: template.seed,
            alphas: suite.alphas.clone(),
            runs: suite.runs,
            n: template.grid.n,
            dt: template.dt,
            t_end: template.t_end,
            cases: suite_cases(suite, template.seed),
            cancellation_fields: suite.cancellation_fields,
            cancellation_stream_offset: CANCELLATION_STREAM,
        },
    )?;
    let rows = run_suite(template, suite)?;
    dir.csv(
        "verdicts.csv",
        &[
            "alpha",
            "case",
            "seed",
            "check",
            "x0",
            "t0",
            "r",
            "p",
            "lhs",
            "rhs_unit",
            "ratio",
            "inputs_digest",
        ],
        rows.iter().map(|r| {
            [
                num(r.alpha),
                r.case.to_string(),
                r.seed.to_string(),
                r.verdict.check.clone(),
                num(r.x0),
                num(r.t0),
                num(r.r),
                r.p.map(num).unwrap_or_default(),
                num(r.verdict.lhs),
                num(r.verdict.rhs_unit),
                num(r.verdict.ratio),
                r.verdict.inputs_digest.clone(),
            ]
        }),
    )?;
    dir.json(
        "summary.json",
        &summarize_suite(&rows, template.grid.n, template.dt),
    )?;
    Ok(Ended::Complete)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerrinSummary {
    pub p: f64,
    pub q: f64,
    pub bounded: bool,
    pub decreasing: bool,
    pub final_running_lp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnsSummary {
    pub alpha: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub max_divergence_defect: f64,
    /// Largest `|int u_j d_j |u_i|^alpha| / scale` over the snapshots.
    pub max_cancellation_ratio: f64,
    pub energy_equality_residual: f64,
    pub exponents: Vec<ExponentRow>,
    pub serrin: Option<SerrinSummary>,
}

/// Per-snapshot identity checks: divergence defect, cancellation value and scale.
pub fn mns_identities(hist: &MnsHistory) -> Result<Vec<[f64; 4]>> {
    hist.velocity
        .par_iter()
        .zip(hist.times.par_iter())
        .map(|(u, t)| {
            let (value, scale) = mns_cancellation(u, hist.alpha)?;
            Ok([*t, u.divergence_defect(), value, scale])
        })
        .collect()
}

fn mns(cfg: &ExperimentConfig, dir: &mut ArtifactDir) -> Result<Ended> {
    let mc = cfg.mns()?;
    let (hist, partial) = match mns_run(mc) {
        Ok(h) => (h, None),
        Err(e) => match (e.cause, e.partial) {
            (cause @ CoreError::BlowUpSuspected { .. }, Some(p)) => (*p, Some(cause.to_string())),
            (cause, _) => return Err(cause.into()),
        },
    };
    let written = write_mns_history(&dir.path("history"), &hist)?;
    dir.record(written);
    let tr = &hist.trace;
    dir.csv(
        "trace.csv",
        &["t", "energy", "dissipation"],
        (0..tr.energy.len()).map(|i| {
            [
                num(tr.t0 + i as f64 * tr.dt),
                num(tr.energy[i]),
                num(tr.dissipation[i]),
            ]
        }),
    )?;
    if let Some(msg) = partial {
        return Ok(Ended::Partial(msg));
    }
    let ids = mns_identities(&hist)?;
    dir.csv(
        "identities.csv",
        &[
            "t",
            "divergence_defect",
            "cancellation",
            "cancellation_scale",
        ],
        ids.iter().map(|r| r.map(num)),
    )?;

    let d = &cfg.diagnostics;
    let centers: Vec<(Vec<f64>, Vec<f64>)> = if d.centers.is_empty() {
        let radii: Vec<f64> = d
            .radii
            .iter()
            .copied()
            .filter(|r| r * r <= mc.t_end && *r <= PI)
            .collect();
        if radii.is_empty() || hist.len() < 2 {
            Vec::new()
        } else {
            vec![(vec![PI, PI, PI, mc.t_end], radii)]
        }
    } else {
        d.centers
            .iter()
            .map(|c| (c.clone(), d.radii.clone()))
            .collect()
    };
    let jobs: Vec<(MnsCylinder, MnsQuantityId)> = centers
        .iter()
        .flat_map(|(c, radii)| {
            radii.iter().flat_map(move |&r| {
                MnsQuantityId::all(d.p)
                    .into_iter()
                    .map(move |id| (MnsCylinder::new([c[0], c[1], c[2]], c[3], r), id))
            })
        })
        .collect();
    let values = jobs
        .par_iter()
        .map(|(cyl, id)| mns_quantity(&hist, cyl, *id, MNS_OVERSAMPLE))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    dir.csv(
        "quantities.csv",
        &["x0", "t0", "r", "quantity_id", "value", "d"],
        jobs.iter().zip(&values).map(|((cyl, id), v)| {
            [
                format!("{} {} {}", num(cyl.x0[0]), num(cyl.x0[1]), num(cyl.x0[2])),
                num(cyl.t0),
                num(cyl.r),
                id.label(),
                num(*v),
                "2".to_string(),
            ]
        }),
    )?;

    let serrin = match d.serrin_q {
        Some(q) => {
            let p = serrin_p_for(q, mc.alpha).expect("validated ladder point");
            let rep = serrin_monitor(&hist, p, q, mc.alpha)?;
            dir.csv(
                "serrin.csv",
                &["t", "lq_norm", "running_lp"],
                (0..rep.times.len()).map(|i| {
                    [
                        num(rep.times[i]),
                        num(rep.lq_norms[i]),
                        num(rep.running_lp[i]),
                    ]
                }),
            )?;
            Some(SerrinSummary {
                p,
                q,
                bounded: rep.bounded,
                decreasing: rep.decreasing,
                final_running_lp: rep.running_lp.last().copied().unwrap_or(0.0),
            })
        }
        None => None,
    };
    let qa = exact_alpha(mc.alpha);
    let qp = exact_alpha(d.p);
    let exponents = MnsQuantityId::all(d.p)
        .iter()
        .map(|id| ExponentRow {
            quantity_id: id.label(),
            exponent: id.exponent(mc.alpha),
            exact: qa
                .zip(qp)
                .and_then(|(a, p)| mns_hardcoded_exponent(id.kind(), a, p).ok())
                .map(|e| e.to_string()),
        })
        .collect();
    let summary = MnsSummary {
        alpha: mc.alpha,
        n: mc.n,
        dt: mc.dt,
        t_end: mc.t_end,
        snapshots: hist.len(),
        max_divergence_defect: hist.max_divergence_defect,
        max_cancellation_ratio: ids
            .iter()
            .map(|r| if r[3] > 0.0 { r[2].abs() / r[3] } else { 0.0 })
            .fold(0.0, f64::max),
        energy_equality_residual: hist.trace.energy_equality_residual(),
        exponents,
        serrin,
    };
    dir.json("summary.json", &summary)?;
    Ok(Ended::Complete)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_alpha_recognizes_fractions() {
        assert_eq!(exact_alpha(5.0 / 3.0), Some(Rational::new(5, 3)));
        assert_eq!(exact_alpha(2.2), Some(Rational::new(11, 5)));
        assert_eq!(exact_alpha(2.0), Some(Rational::from_integer(2)));
    }

    #[test]
    fn exponent_table_hits_known_points() {
        let t = exponent_table(2.0, 3.0);
        let sing = t.iter().find(|r| r.quantity_id == "singular_set").unwrap();
        assert_eq!(sing.exponent, 1.0);
        assert_eq!(sing.exact.as_deref(), Some("1"));
        let t = exponent_table(5.0 / 3.0, 3.0);
        let sing = t.iter().find(|r| r.quantity_id == "singular_set").unwrap();
        assert_eq!(sing.exact.as_deref(), Some("0"));
        assert_eq!(t.len(), 10);
    }

    #[test]
    fn suite_seeds_are_distinct_and_stable() {
        let s = SuiteSpec {
            runs: 4,
            ..SuiteSpec::default()
        };
        let a = suite_cases(&s, 9);
        assert_eq!(a, suite_cases(&s, 9));
        assert_eq!(a.len(), 12);
        let mut seeds: Vec<u64> = a.iter().map(|c| c.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 12);
    }

    #[test]
    fn ladder_fit_ignores_non_positive_values() {
        let f = fit_ladder(&[0.4, 0.2, 0.1, 0.05], &[0.0256, 0.0016, 0.0001, 0.0]).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-12);
        assert!(fit_ladder(&[0.4, 0.2], &[1.0, f64::NAN]).is_none());
    }
}
