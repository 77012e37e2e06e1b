//! Little-endian snapshot files and the JSON index of a stored history.
//!
//! `SGM1`: magic, `n: u32`, `alpha`, `length`, `time` (f64), then `n`
//! coefficients as `(re, im)` f64 pairs in FFT order.
//! `MNS1`: the same header followed by three blocks of `n^3` coefficients,
//! one per velocity component.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sgm_core::mns::{pressure, MnsHistory, MnsTrace, VelocityField3D, BOX_LENGTH};
use sgm_core::sgm::{EnergyTrace, ForcingSpec, HistoryOrigin, SpaceTimeHistory};
use sgm_core::{GridSpec1D, SpectralField1D};

use crate::error::{LabError, Result};

pub const SGM_MAGIC: [u8; 4] = *b"SGM1";
pub const MNS_MAGIC: [u8; 4] = *b"MNS1";
const HEADER_LEN: usize = 4 + 4 + 3 * 8;

pub const HISTORY_INDEX: &str = "history.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub magic: [u8; 4],
    pub n: u32,
    pub alpha: f64,
    pub length: f64,
    pub time: f64,
}

fn encode(header: &Header, blocks: &[&[Complex64]]) -> Vec<u8> {
    let count: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * count);
    out.extend_from_slice(&header.magic);
    out.extend_from_slice(&header.n.to_le_bytes());
    out.extend_from_slice(&header.alpha.to_le_bytes());
    out.extend_from_slice(&header.length.to_le_bytes());
    out.extend_from_slice(&header.time.to_le_bytes());
    for block in blocks {
        for c in block.iter() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

/// Splits a snapshot file into its header and `blocks` coefficient blocks of `len(n)` each.
fn decode(
    path: &Path,
    bytes: &[u8],
    magic: [u8; 4],
    blocks: usize,
    len: impl Fn(usize) -> usize,
) -> Result<(Header, Vec<Vec<Complex64>>)> {
    let bad = |msg: String| LabError::format(path, "snapshot", msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if bytes[..4] != magic {
        return Err(bad(format!(
            "magic {:?} is not {:?}",
            String::from_utf8_lossy(&bytes[..4]),
            String::from_utf8_lossy(&magic)
        )));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
    let header = Header {
        magic,
        n,
        alpha: f64_at(bytes, 8),
        length: f64_at(bytes, 16),
        time: f64_at(bytes, 24),
    };
    let per = len(n as usize);
    let want = HEADER_LEN + 16 * blocks * per;
    if bytes.len() != want {
        return Err(bad(format!("{} bytes, expected {want}", bytes.len())));
    }
    let mut out = Vec::with_capacity(blocks);
    let mut at = HEADER_LEN;
    for _ in 0..blocks {
        let mut b = Vec::with_capacity(per);
        for _ in 0..per {
            b.push(Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8)));
            at += 16;
        }
        out.push(b);
    }
    Ok((header, out))
}

pub fn encode_sgm(h: &SpectralField1D, alpha: f64, time: f64) -> Vec<u8> {
    let header = Header {
        magic: SGM_MAGIC,
        n: h.grid().n as u32,
        alpha,
        length: h.grid().length,
        time,
    };
    encode(&header, &[h.coeffs()])
}

pub fn decode_sgm(path: &Path, bytes: &[u8]) -> Result<(Header, Vec<Complex64>)> {
    let (header, mut blocks) = decode(path, bytes, SGM_MAGIC, 1, |n| n)?;
    Ok((header, blocks.remove(0)))
}

pub fn encode_mns(u: &VelocityField3D, alpha: f64, time: f64) -> Vec<u8> {
    let header = Header {
        magic: MNS_MAGIC,
        n: u.side() as u32,
        alpha,
        length: BOX_LENGTH,
        time,
    };
    let c = u.components();
    encode(&header, &[&c[0], &c[1], &c[2]])
}

pub fn decode_mns(path: &Path, bytes: &[u8]) -> Result<(Header, [Vec<Complex64>; 3])> {
    let (header, blocks) = decode(path, bytes, MNS_MAGIC, 3, |n| n * n * n)?;
    let [a, b, c]: [Vec<Complex64>; 3] = blocks.try_into().expect("three blocks");
    Ok((header, [a, b, c]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub time: f64,
}

/// `history.json`: the snapshot files of a run and what is needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryIndex {
    pub format: String,
    pub alpha: f64,
    pub n: usize,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec1D>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<HistoryOrigin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<ForcingSpec>,
    pub snapshots: Vec<SnapshotEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_trace: Option<EnergyTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mns_trace: Option<MnsTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_divergence_defect: Option<f64>,
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| LabError::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| LabError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| LabError::format(path, "JSON output", e))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(
    path: &Path,
    what: &'static str,
) -> Result<T> {
    let text = read_file(path)?;
    serde_json::from_slice(&text).map_err(|e| LabError::format(path, what, e))
}

fn snapshot_name(i: usize, ext: &str) -> String {
    format!("snapshots/{i:05}.{ext}")
}

/// Writes every snapshot plus `history.json` under `dir`; returns the written paths.
pub fn write_sgm_history(dir: &Path, hist: &SpaceTimeHistory) -> Result<Vec<PathBuf>> {
    let sub = dir.join("snapshots");
    fs::create_dir_all(&sub).map_err(|e| LabError::io(&sub, e))?;
    let mut written = Vec::with_capacity(hist.len() + 1);
    let mut entries = Vec::with_capacity(hist.len());
    for (i, (t, h)) in hist.times().iter().zip(hist.snapshots()).enumerate() {
        let name = snapshot_name(i, "sgm");
        let path = dir.join(&name);
        write_file(&path, &encode_sgm(h, hist.alpha(), *t))?;
        written.push(path);
        entries.push(SnapshotEntry {
            file: name,
            time: *t,
        });
    }
    let index = HistoryIndex {
        format: "SGM1".into(),
        alpha: hist.alpha(),
        n: hist.grid().n,
        length: hist.grid().length,
        grid: Some(*hist.grid()),
        origin: Some(hist.origin()),
        forcing: Some(hist.forcing().clone()),
        snapshots: entries,
        energy_trace: hist.trace().cloned(),
        mns_trace: None,
        max_divergence_defect: None,
    };
    let path = dir.join(HISTORY_INDEX);
    write_json(&path, &index)?;
    written.push(path);
    Ok(written)
}

fn check_header(path: &Path, h: &Header, index: &HistoryIndex, time: f64) -> Result<()> {
    let same = h.n as usize == index.n
        && h.alpha.to_bits() == index.alpha.to_bits()
        && h.length.to_bits() == index.length.to_bits()
        && h.time.to_bits() == time.to_bits();
    if !same {
        return Err(LabError::format(
            path,
            "snapshot",
            "header disagrees with history.json",
        ));
    }
    Ok(())
}

/// Rebuilds a history written by [`write_sgm_history`].
pub fn read_sgm_history(dir: &Path) -> Result<SpaceTimeHistory> {
    let ipath = dir.join(HISTORY_INDEX);
    let index: HistoryIndex = read_json(&ipath, "history index")?;
    if index.format != "SGM1" {
        return Err(LabError::format(
            &ipath,
            "history index",
            format!("format {} is not SGM1", index.format),
        ));
    }
    let grid = match index.grid {
        Some(g) => g,
        None => GridSpec1D::new(index.n, index.length, Default::default())?,
    };
    let mut times = Vec::with_capacity(index.snapshots.len());
    let mut snaps = Vec::with_capacity(index.snapshots.len());
    for e in &index.snapshots {
        let path = dir.join(&e.file);
        let (header, coeffs) = decode_sgm(&path, &read_file(&path)?)?;
        check_header(&path, &header, &index, e.time)?;
        times.push(e.time);
        snaps.push(SpectralField1D::from_coeffs(grid, coeffs)?);
    }
    let hist = SpaceTimeHistory::new(
        grid,
        index.alpha,
        times,
        snaps,
        index.forcing.unwrap_or_default(),
        index.origin.unwrap_or(HistoryOrigin::Synthetic),
    )?;
    Ok(hist.with_trace(index.energy_trace))
}

pub fn write_mns_history(dir: &Path, hist: &MnsHistory) -> Result<Vec<PathBuf>> {
    let sub = dir.join("snapshots");
    fs::create_dir_all(&sub).map_err(|e| LabError::io(&sub, e))?;
    let mut written = Vec::with_capacity(hist.len() + 1);
    let mut entries = Vec::with_capacity(hist.len());
    for (i, (t, u)) in hist.times.iter().zip(&hist.velocity).enumerate() {
        let name = snapshot_name(i, "mns");
        let path = dir.join(&name);
        write_file(&path, &encode_mns(u, hist.alpha, *t))?;
        written.push(path);
        entries.push(SnapshotEntry {
            file: name,
            time: *t,
        });
    }
    let index = HistoryIndex {
        format: "MNS1".into(),
        alpha: hist.alpha,
        n: hist.side(),
        length: BOX_LENGTH,
        grid: None,
        origin: None,
        forcing: None,
        snapshots: entries,
        energy_trace: None,
        mns_trace: Some(hist.trace.clone()),
        max_divergence_defect: Some(hist.max_divergence_defect),
    };
    let path = dir.join(HISTORY_INDEX);
    write_json(&path, &index)?;
    written.push(path);
    Ok(written)
}

/// Rebuilds an MNS history; pressures are recovered from the velocities.
pub fn read_mns_history(dir: &Path) -> Result<MnsHistory> {
    let ipath = dir.join(HISTORY_INDEX);
    let index: HistoryIndex = read_json(&ipath, "history index")?;
    if index.format != "MNS1" {
        return Err(LabError::format(
            &ipath,
            "history index",
            format!("format {} is not MNS1", index.format),
        ));
    }
    let mut times = Vec::new();
    let mut velocity = Vec::new();
    let mut pressures = Vec::new();
    for e in &index.snapshots {
        let path = dir.join(&e.file);
        let (header, comps) = decode_mns(&path, &read_file(&path)?)?;
        check_header(&path, &header, &index, e.time)?;
        let u = VelocityField3D::from_coeffs(index.n, comps)?;
        pressures.push(pressure(&u, index.alpha)?);
        velocity.push(u);
        times.push(e.time);
    }
    Ok(MnsHistory {
        alpha: index.alpha,
        times,
        velocity,
        pressure: pressures,
        trace: index.mns_trace.unwrap_or_default(),
        max_divergence_defect: index.max_divergence_defect.unwrap_or(0.0),
    })
}
