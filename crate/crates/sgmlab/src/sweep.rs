//! Alpha sweeps over a base configuration, and manifest replay.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{num, ArtifactDir, FileEntry, Manifest, ManifestKind, Status, MANIFEST};
use crate::config::{check_sweep_alpha, ExperimentConfig, Mode};
use crate::error::{exit, LabError, Result};
use crate::experiment::{exponent_table, run_experiment, Outcome};
use crate::snapshot::read_json;

pub const DEFAULT_ALPHAS: [&str; 5] = ["1.5", "5/3", "2", "2.2", "2.3"];

/// One grid point, keeping the text it was given as.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAlpha {
    pub label: String,
    pub value: f64,
}

/// Parses `a/b` fractions or decimals and checks the admissible range.
pub fn parse_alpha(text: &str) -> Result<SweepAlpha> {
    let t = text.trim();
    let bad = |msg: &str| LabError::config("alpha", format!("`{t}`: {msg}"));
    let value = match t.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad("bad numerator"))?;
            let b: f64 = b.trim().parse().map_err(|_| bad("bad denominator"))?;
            if b == 0.0 {
                return Err(bad("zero denominator"));
            }
            a / b
        }
        None => t.parse().map_err(|_| bad("not a number"))?,
    };
    check_sweep_alpha(value)?;
    Ok(SweepAlpha {
        label: t.to_string(),
        value,
    })
}

/// Subdirectory name of a grid point: `alpha-5_3`, `alpha-2.2`.
pub fn alpha_dir(label: &str) -> String {
    format!("alpha-{}", label.replace('/', "_"))
}

/// The base configuration specialized to one alpha.
pub fn config_for(base: &ExperimentConfig, alpha: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    cfg.output_dir = None;
    match cfg.solver.as_mut() {
        Some(s) => s.alpha = alpha,
        None => {
            return Err(LabError::config(
                "solver",
                "a sweep needs a [solver] section",
            ))
        }
    }
    if cfg.mode == Mode::Inequalities {
        let mut suite = cfg.suite.take().unwrap_or_default();
        suite.alphas = vec![alpha];
        cfg.suite = Some(suite);
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepItem {
    pub alpha: String,
    pub alpha_value: f64,
    pub dir: String,
    pub status: Status,
    pub exit_code: u8,
    /// Dimension exponent of the singular set, `(3 alpha - 5) / (alpha - 1)`.
    pub singular_set_exponent: f64,
    /// The per-alpha `summary.json`, when the run got that far.
    pub summary: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub mode: String,
    pub items: Vec<SweepItem>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub items: Vec<Outcome>,
    pub exit_code: u8,
}

/// Runs `base` at every alpha into `out/alpha-*` and writes the cross-alpha
/// summary. Every alpha is checked before anything runs.
pub fn sweep(
    base: &ExperimentConfig,
    alphas: &[String],
    out: &Path,
    force: bool,
) -> Result<SweepOutcome> {
    if base.mode == Mode::MnsRun {
        return Err(LabError::config(
            "mode",
            "sweeps cover the surface growth modes; run mns-run configurations one at a time",
        ));
    }
    let grid = alphas
        .iter()
        .map(|a| parse_alpha(a))
        .collect::<Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(LabError::config("alpha", "empty alpha grid"));
    }
    let configs = grid
        .iter()
        .map(|a| config_for(base, a.value))
        .collect::<Result<Vec<_>>>()?;

    let mut dir = ArtifactDir::create(out, force)?;
    let items = grid
        .par_iter()
        .zip(configs.par_iter())
        .map(|(a, cfg)| run_experiment(cfg, &dir.path(&alpha_dir(&a.label)), false))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut summary = SweepSummary {
        mode: base.mode.name().into(),
        items: Vec::new(),
    };
    for (a, item) in grid.iter().zip(&items) {
        let sub = alpha_dir(&a.label);
        let mut recorded: Vec<PathBuf> = item
            .manifest
            .files
            .iter()
            .map(|f| item.dir.join(&f.path))
            .collect();
        recorded.push(item.dir.join(MANIFEST));
        dir.record(recorded);
        let p = base.diagnostics.p;
        for r in exponent_table(a.value, p) {
            rows.push([
                a.label.clone(),
                num(a.value),
                r.quantity_id,
                num(r.exponent),
                r.exact.unwrap_or_default(),
            ]);
        }
        let summary_path = item.dir.join("summary.json");
        let per = if summary_path.is_file() {
            Some(read_json::<serde_json::Value>(&summary_path, "summary")?)
        } else {
            None
        };
        summary.items.push(SweepItem {
            alpha: a.label.clone(),
            alpha_value: a.value,
            dir: sub,
            status: item.manifest.status,
            exit_code: item.exit_code,
            singular_set_exponent: sgm_core::dimension::singular_set_exponent_f64(a.value),
            summary: per,
        });
    }
    dir.csv(
        "exponents.csv",
        &["alpha", "alpha_value", "quantity_id", "exponent", "exact"],
        rows,
    )?;
    dir.json("sweep_summary.json", &summary)?;

    let exit_code = items.iter().map(|o| o.exit_code).max().unwrap_or(exit::OK);
    let status = if items.iter().all(|o| o.manifest.status == Status::Complete) {
        Status::Complete
    } else {
        Status::Partial
    };
    let root = dir.root().to_path_buf();
    let manifest = dir.finish(
        ManifestKind::Sweep,
        base,
        Some(grid.iter().map(|a| a.label.clone()).collect()),
        status,
        None,
    )?;
    Ok(SweepOutcome {
        dir: root,
        manifest,
        items,
        exit_code,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayDiff {
    pub path: String,
    pub recorded: Option<String>,
    pub replayed: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub dir: PathBuf,
    pub compared: usize,
    pub mismatches: Vec<ReplayDiff>,
    /// Exit code of the rerun itself.
    pub run_exit_code: u8,
}

impl ReplayOutcome {
    pub fn exit_code(&self) -> u8 {
        if !self.mismatches.is_empty() {
            exit::MISMATCH
        } else {
            self.run_exit_code
        }
    }
}

fn csv_digests(m: &Manifest) -> BTreeMap<&str, &str> {
    m.csv_files()
        .map(|f: &FileEntry| (f.path.as_str(), f.sha256.as_str()))
        .collect()
}

/// Reruns the configuration recorded in `recorded/manifest.json` into `out`
/// and compares every CSV table by SHA-256.
pub fn replay(recorded: &Path, out: &Path, force: bool) -> Result<ReplayOutcome> {
    let path = if recorded.is_dir() {
        recorded.join(MANIFEST)
    } else {
        recorded.to_path_buf()
    };
    let old = Manifest::load(&path)?;
    let (new, run_exit_code) = match old.kind {
        ManifestKind::Experiment => {
            let o = run_experiment(&old.config, out, force)?;
            (o.manifest, o.exit_code)
        }
        ManifestKind::Sweep => {
            let alphas = old.alphas.clone().ok_or_else(|| {
                LabError::format(&path, "manifest", "sweep manifest without an alpha grid")
            })?;
            let o = sweep(&old.config, &alphas, out, force)?;
            (o.manifest, o.exit_code)
        }
    };
    let (a, b) = (csv_digests(&old), csv_digests(&new));
    let mut mismatches = Vec::new();
    for key in a.keys().chain(b.keys().filter(|k| !a.contains_key(*k))) {
        let (x, y) = (a.get(key), b.get(key));
        if x != y {
            mismatches.push(ReplayDiff {
                path: key.to_string(),
                recorded: x.map(|s| s.to_string()),
                replayed: y.map(|s| s.to_string()),
            });
        }
    }
    Ok(ReplayOutcome {
        dir: out.to_path_buf(),
        compared: a.len().max(b.len()),
        mismatches,
        run_exit_code,
    })
}
