//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::bugcache::{BugCacheConfig, HistoryCutoff};
use crate::codestruct::{Bm25Params, Language, SnapshotGranularity};
use crate::composer::{FusionKind, FusionSpec, Normalization, DEFAULT_SPLIT_RATIO};
use crate::corpus::TruthPolicy;
use crate::tracescore::{CutoffMode, SizeLimits};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub project: String,
    pub issues: PathBuf,
    /// JSONL commit log, or a git repository.
    pub commits: PathBuf,
    pub links: Option<PathBuf>,
    /// Checkout used for code-structure scoring. Defaults to the repository when
    /// `commits` is one.
    pub sources: Option<PathBuf>,
    pub workdir: PathBuf,
    pub language: Language,
    pub extensions: Vec<String>,
    pub cutoff: CutoffMode,
    pub size_limits: SizeLimits,
    pub bugcache: BugCacheConfig,
    pub bm25: Bm25Params,
    pub snapshot_granularity: SnapshotGranularity,
    pub composers: Vec<FusionKind>,
    /// Composer parameters such as `fixed.a` or `rf.trees`, keyed without the composer prefix
    /// for the composer they belong to.
    pub composer_params: BTreeMap<String, f64>,
    pub normalization: Normalization,
    pub split_ratio: f64,
    pub seed: u64,
    pub truth_policy: TruthPolicy,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(project: impl Into<String>, issues: PathBuf, commits: PathBuf, workdir: PathBuf) -> Self {
        Self {
            project: project.into(),
            issues,
            commits,
            links: None,
            sources: None,
            workdir,
            language: Language::Java,
            extensions: vec![".java".into(), ".py".into()],
            cutoff: CutoffMode::Relaxed,
            size_limits: SizeLimits::default(),
            bugcache: BugCacheConfig::default(),
            bm25: Bm25Params::default(),
            snapshot_granularity: SnapshotGranularity::default(),
            composers: vec![FusionKind::FixedWeight],
            composer_params: BTreeMap::new(),
            normalization: Normalization::default(),
            split_ratio: DEFAULT_SPLIT_RATIO,
            seed: 42,
            truth_policy: TruthPolicy::AllChanged,
            threads: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected key = value", n + 1)))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |entries: &mut BTreeMap<String, String>, key: &str| entries.remove(key);
        let required = |entries: &mut BTreeMap<String, String>, key: &str| {
            take(entries, key).ok_or_else(|| PipelineError::Config(format!("missing key `{key}`")))
        };
        let path = |v: String| -> PathBuf {
            let p = PathBuf::from(v);
            if p.is_absolute() { p } else { base.join(p) }
        };
        let bad = |key: &str, v: &str| PipelineError::Config(format!("invalid value {v:?} for `{key}`"));

        let project = required(&mut entries, "project")?;
        let issues = path(required(&mut entries, "issues")?);
        let commits = path(required(&mut entries, "commits")?);
        let workdir = path(take(&mut entries, "workdir").unwrap_or_else(|| format!("out/{project}")));
        let mut cfg = RunConfig::new(project, issues, commits, workdir);
        cfg.links = take(&mut entries, "links").map(path);
        cfg.sources = take(&mut entries, "sources").map(path);

        let keys: Vec<String> = entries.keys().cloned().collect();
        for key in keys {
            let v = entries.remove(&key).expect("key listed");
            cfg.set(&key, &v).map_err(|_| bad(&key, &v))?;
        }
        Ok(cfg)
    }

    /// Applies one non-path setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), PipelineError> {
        let err = || PipelineError::Config(format!("invalid value {v:?} for `{key}`"));
        let num = || v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(err);
        let boolean = || match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(err()),
        };
        match key {
            "language" => self.language = Language::parse(v).map_err(|_| err())?,
            "extensions" => {
                self.extensions = v.split(',').map(|e| e.trim().to_string()).filter(|e| !e.is_empty()).collect()
            }
            "cutoff" => self.cutoff = CutoffMode::parse(v).ok_or_else(err)?,
            "trace.max_bug_files" => self.size_limits.bug = v.parse().map_err(|_| err())?,
            "trace.max_feature_files" => self.size_limits.feature = v.parse().map_err(|_| err())?,
            "bugcache.k" => self.bugcache.window_days = num()?,
            "bugcache.cutoff" => self.bugcache.cutoff = HistoryCutoff::parse(v).ok_or_else(err)?,
            "allow_leakage" => self.bugcache.allow_leakage = boolean()?,
            "bm25.k1" => self.bm25.k1 = num()?,
            "bm25.b" => self.bm25.b = num()?,
            "snapshot_granularity" => self.snapshot_granularity = SnapshotGranularity::parse(v).ok_or_else(err)?,
            "composers" | "composer" => {
                self.composers =
                    v.split(',').map(FusionKind::parse).collect::<Result<Vec<_>, _>>().map_err(|_| err())?;
                if self.composers.is_empty() {
                    return Err(err());
                }
            }
            "normalization" => self.normalization = Normalization::parse(v).ok_or_else(err)?,
            "split_ratio" => self.split_ratio = num()?,
            "seed" => self.seed = v.parse().map_err(|_| err())?,
            "truth_policy" => {
                self.truth_policy = match v.to_ascii_lowercase().replace('-', "_").as_str() {
                    "all" | "all_changed" => TruthPolicy::AllChanged,
                    "exclude_added" => TruthPolicy::ExcludeAdded,
                    _ => return Err(err()),
                }
            }
            "threads" => self.threads = Some(v.parse().map_err(|_| err())?),
            k if k.contains('.') => {
                let (prefix, _) = k.split_once('.').expect("dotted key");
                if !["fixed", "corrb", "lr", "dt", "rf", "mlp"].contains(&prefix) {
                    return Err(PipelineError::Config(format!("unknown key `{k}`")));
                }
                self.composer_params.insert(k.to_string(), num()?);
            }
            _ => return Err(PipelineError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// The fusion spec for one composer, with its parameters and the run seed.
    pub fn fusion_spec(&self, kind: FusionKind) -> FusionSpec {
        let mut spec = FusionSpec::new(kind).with_seed(self.seed);
        spec.normalization = self.normalization;
        let prefix = match kind {
            FusionKind::FixedWeight => Some("fixed."),
            FusionKind::CorrB => Some("corrb."),
            _ => None,
        };
        for (k, v) in &self.composer_params {
            match prefix {
                Some(p) => {
                    if let Some(short) = k.strip_prefix(p) {
                        spec.params.insert(short.to_string(), *v);
                    }
                }
                None => {
                    let own = format!("{}.", kind.as_str());
                    if k.starts_with(&own) {
                        spec.params.insert(k.clone(), *v);
                    }
                }
            }
        }
        if kind == FusionKind::FixedWeight {
            spec.params.entry("a".into()).or_insert(0.2);
            spec.params.entry("b".into()).or_insert(0.3);
        }
        if kind == FusionKind::CorrB {
            spec.params.entry("top_n".into()).or_insert(10.0);
        }
        spec
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.bugcache.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.split_ratio) {
            return Err(PipelineError::Config(format!("split_ratio must lie in [0,1], got {}", self.split_ratio)));
        }
        if self.bm25.k1 < 0.0 || !(0.0..=1.0).contains(&self.bm25.b) {
            return Err(PipelineError::Config("bm25.k1 must be >= 0 and bm25.b in [0,1]".into()));
        }
        for kind in &self.composers {
            self.fusion_spec(*kind).validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
