//! Output directories, CSV tables and the manifest that indexes them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::snapshot::write_json;

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// SHA-256 of the compact JSON form of a configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(&serde_json::to_vec(cfg).expect("configurations serialize"))
}

/// Shortest round-trip decimal form, so CSV values reparse to the same bits.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    /// Stopped early (suspected blow-up); the artifacts cover what was computed.
    Partial,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestKind {
    Experiment,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the manifest, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: ManifestKind,
    pub mode: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Sweep grid as given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        crate::snapshot::read_json(path, "manifest")
    }

    pub fn csv_files(&self) -> impl Iterator<Item = &FileEntry> {
        self.files.iter().filter(|f| f.path.ends_with(".csv"))
    }
}

/// An output directory being filled. Every file goes through it so the
/// manifest lists exactly what was written.
#[derive(Debug)]
pub struct ArtifactDir {
    root: PathBuf,
    files: Vec<PathBuf>,
}

fn is_empty_dir(path: &Path) -> Result<bool> {
    let mut it = fs::read_dir(path).map_err(|e| LabError::io(path, e))?;
    Ok(it.next().is_none())
}

impl ArtifactDir {
    /// Creates `root`. An existing non-empty directory is an error unless
    /// `force` is set and it holds a previous manifest, in which case it is
    /// cleared.
    pub fn create(root: &Path, force: bool) -> Result<Self> {
        if root.exists() && !is_empty_dir(root)? {
            let collision = || {
                LabError::io(
                    root,
                    std::io::Error::new(
                        std::io::ErrorKind::AlreadyExists,
                        "output directory exists and is not empty (pass --force to replace a previous run)",
                    ),
                )
            };
            if !force {
                return Err(collision());
            }
            if !root.join(MANIFEST).is_file() {
                return Err(LabError::io(
                    root,
                    std::io::Error::new(
                        std::io::ErrorKind::AlreadyExists,
                        "refusing to clear a directory that holds no manifest.json",
                    ),
                ));
            }
            fs::remove_dir_all(root).map_err(|e| LabError::io(root, e))?;
        }
        fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Registers files written by other means (snapshots, nested outputs).
    pub fn record<I: IntoIterator<Item = PathBuf>>(&mut self, paths: I) {
        self.files.extend(paths);
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let path = self.path(rel);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }

    pub fn csv<R, I>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let path = self.path(rel);
        let io = |e: csv::Error| LabError::format(&path, "CSV output", e);
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn entries(&self) -> Result<Vec<FileEntry>> {
        let mut out = Vec::with_capacity(self.files.len());
        for p in &self.files {
            let bytes = fs::read(p).map_err(|e| LabError::io(p, e))?;
            let rel = p.strip_prefix(&self.root).unwrap_or(p);
            let path = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            out.push(FileEntry {
                path,
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        out.dedup_by(|a, b| a.path == b.path);
        Ok(out)
    }

    /// Writes `manifest.json` listing every recorded file.
    pub fn finish(
        self,
        kind: ManifestKind,
        cfg: &ExperimentConfig,
        alphas: Option<Vec<String>>,
        status: Status,
        error: Option<String>,
    ) -> Result<Manifest> {
        let manifest = Manifest {
            tool: "sgmlab".into(),
            version: VERSION.into(),
            kind,
            mode: cfg.mode.name().into(),
            config: cfg.clone(),
            config_hash: config_hash(cfg),
            alphas,
            status,
            error,
            files: self.entries()?,
        };
        write_json(&self.root.join(MANIFEST), &manifest)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e22, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
