//! Archive files: `archive.csv`, `archive.json` and one JSON file per elite.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Archive, Counters, Elite, StatsRow};
use crate::eval::Descriptor;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

#[derive(Serialize, Deserialize)]
struct ArchiveMeta {
    descriptor: Descriptor,
    counters: Counters,
    fill_order: Vec<Vec<usize>>,
}

pub fn bin_name(bin: &[usize]) -> String {
    bin.iter().map(usize::to_string).collect::<Vec<_>>().join("_")
}

/// The CSV table: one row per elite in bin order.
pub fn archive_csv(archive: &Archive) -> String {
    let mut out = String::new();
    for name in &archive.descriptor.names {
        let _ = write!(out, "{name},");
    }
    out.push_str("fitness,kind,provenance,birth\n");
    for e in archive.elites() {
        for b in &e.bin {
            let _ = write!(out, "{b},");
        }
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.fitness,
            e.genome.genotype.kind(),
            e.genome.provenance.as_str(),
            e.birth
        );
    }
    out
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Write `archive.csv`, `archive.json` and `elites/<bin>.json` under `dir`.
/// Stale elite files from an earlier snapshot are removed.
pub fn write_snapshot(archive: &Archive, dir: &Path) -> Result<(), SnapshotError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("archive.csv"), archive_csv(archive))?;
    let meta = ArchiveMeta {
        descriptor: archive.descriptor.clone(),
        counters: archive.counters,
        fill_order: archive.fill_order().to_vec(),
    };
    fs::write(dir.join("archive.json"), to_json(&meta))?;
    let elites = dir.join("elites");
    if elites.exists() {
        fs::remove_dir_all(&elites)?;
    }
    fs::create_dir_all(&elites)?;
    for e in archive.elites() {
        fs::write(elites.join(format!("{}.json", bin_name(&e.bin))), to_json(e))?;
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SnapshotError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SnapshotError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_snapshot(dir: &Path) -> Result<Archive, SnapshotError> {
    let meta_path = dir.join("archive.json");
    let meta: ArchiveMeta = read_json(&meta_path)?;
    let elites = meta
        .fill_order
        .iter()
        .map(|b| read_json::<Elite>(&dir.join("elites").join(format!("{}.json", bin_name(b)))))
        .collect::<Result<Vec<_>, _>>()?;
    Archive::from_parts(meta.descriptor, elites, meta.fill_order, meta.counters).ok_or_else(|| SnapshotError::Format {
        path: meta_path,
        message: "elite files do not match the fill order".into(),
    })
}

pub fn write_stats_log(rows: &[StatsRow], path: &Path) -> Result<(), SnapshotError> {
    let mut out = String::from("evaluations,filled,qd_score,cppn_elites,direct_elites,failures\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.evaluations, r.filled, r.qd_score, r.cppn_elites, r.direct_elites, r.failures
        );
    }
    fs::write(path, out)?;
    Ok(())
}
