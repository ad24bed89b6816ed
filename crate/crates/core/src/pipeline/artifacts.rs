//! Artifact files: atomic writes, input hashing and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, RunConfig};
use crate::composer::FusionSpec;
use crate::eval::MetricsReport;

pub const INGEST_SUMMARY: &str = "ingest_summary.json";
pub const FEATURES: &str = "features.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const MANIFEST: &str = "run_manifest.json";

pub fn rankings_file(composer: &str) -> String {
    format!("rankings_{composer}.csv")
}

pub fn report_csv_file(composer: &str) -> String {
    format!("report_{composer}.csv")
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let io = |e: std::io::Error| PipelineError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Io(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

/// Renders a CSV into memory with `f`, then writes it atomically.
pub fn write_csv_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<(), PipelineError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    write_atomic(path, &buf)
}

fn hash_dir(hasher: &mut Sha256, root: &Path, dir: &Path) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            hash_dir(hasher, root, &path)?;
        } else {
            let rel = path.strip_prefix(root).unwrap_or(&path);
            hasher.update(rel.to_string_lossy().as_bytes());
            hasher.update([0]);
            hasher.update(std::fs::read(&path)?);
            hasher.update([0]);
        }
    }
    Ok(())
}

/// `sha256:<hex>` of a file or a directory tree; `git:<HEAD>` for repositories.
pub fn hash_input(path: &Path) -> Result<String, PipelineError> {
    let io = |e: std::io::Error| PipelineError::Data(format!("cannot hash {}: {e}", path.display()));
    if path.join(".git").exists() {
        let out = Command::new("git")
            .arg("-C")
            .arg(path)
            .args(["rev-parse", "HEAD"])
            .output()
            .map_err(io)?;
        return Ok(format!("git:{}", String::from_utf8_lossy(&out.stdout).trim()));
    }
    let mut hasher = Sha256::new();
    if path.is_dir() {
        hash_dir(&mut hasher, path, path).map_err(io)?;
    } else {
        hasher.update(std::fs::read(path).map_err(io)?);
    }
    Ok(format!("sha256:{}", hex::encode(hasher.finalize())))
}

/// Everything needed to reproduce a run. Contains no wall-clock data so reruns match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub project: String,
    pub seed: u64,
    pub composers: Vec<FusionSpec>,
    pub config: RunConfig,
    pub input_hashes: BTreeMap<String, String>,
    pub split: Option<SplitRecord>,
    pub feature_importances: BTreeMap<String, [f64; 3]>,
    pub history_audit: Option<HistoryAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Result of checking every commit that fed a history score against its query's creation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryAudit {
    pub queries: usize,
    pub commits_checked: usize,
    pub violations: usize,
    pub leakage_allowed: bool,
}

/// All composer reports of one project run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub project: String,
    pub reports: Vec<MetricsReport>,
    pub notes: Vec<String>,
}

impl ReportBundle {
    pub fn for_composer(&self, composer: Option<&str>) -> Option<&MetricsReport> {
        match composer {
            Some(c) => self.reports.iter().find(|r| r.composer == c),
            None => self.reports.first(),
        }
    }
}

pub fn input_hashes(cfg: &RunConfig) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut out = BTreeMap::new();
    out.insert("issues".to_string(), hash_input(&cfg.issues)?);
    out.insert("commits".to_string(), hash_input(&cfg.commits)?);
    if let Some(links) = &cfg.links {
        out.insert("links".to_string(), hash_input(links)?);
    }
    if let Some(sources) = &cfg.sources {
        out.insert("sources".to_string(), hash_input(sources)?);
    }
    Ok(out)
}
