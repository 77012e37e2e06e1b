//! Experiment driver for the `sgm-core` solvers: TOML configurations in,
//! binary snapshots, CSV tables and JSON manifests out.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiment;
pub mod snapshot;
pub mod sweep;

pub use error::{LabError, Result};

use std::path::{Path, PathBuf};

/// Output directory of a run: the explicit `--out`, then the configured
/// `output_dir`, then `<root>/<config stem>` where the root is `$SGMLAB_OUT`
/// or `sgmlab-out`.
pub fn resolve_output_dir(
    out: Option<&Path>,
    cfg: &config::ExperimentConfig,
    config_path: &Path,
    env_root: Option<&Path>,
) -> PathBuf {
    if let Some(o) = out {
        return o.to_path_buf();
    }
    if let Some(o) = &cfg.output_dir {
        return o.clone();
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    env_root
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("sgmlab-out"))
        .join(stem)
}
