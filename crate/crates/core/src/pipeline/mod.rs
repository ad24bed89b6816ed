//! End-to-end runs: ingest, score the three components, fuse, evaluate, report.
//!
//! Each stage persists its output in the work directory so later stages (or other
//! tools) can start from it.

mod artifacts;
mod compare;
mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{info, warn};

pub use artifacts::{
    hash_input, input_hashes, rankings_file, read_json, report_csv_file, write_atomic, write_json, HistoryAudit,
    ReportBundle, RunManifest, SplitRecord, FEATURES, INGEST_SUMMARY, MANIFEST, REPORT_CSV, REPORT_JSON,
};
pub use compare::{compare_runs, load_reports, write_comparison_csv, CompareTest, ComparisonRow};
pub use config::RunConfig;

use crate::bugcache::{audit_leakage, bugcache_score, find_fix_commits};
use crate::codestruct::{
    extract_fields, structure_score, CodeFields, DirectorySource, GitSource, Language, SnapshotGranularity,
    SourceProvider, StructuredIndex,
};
use crate::composer::{
    assemble_features, group_by_bug, predict_rank, read_features, read_rankings, split_train_test, train_model,
    undersample, write_features, write_rankings, ComponentTables, FeatureRow, FusionKind, ModelParams, RankedList,
};
use crate::corpus::{
    bug_id_set, ground_truth, link_issues_commits, load_commits, load_issues, load_links, CommitLog, FileSnapshot,
    IssueCorpus, IssueFormat, Rejection, SnapshotTimeline, SourceFilter, Timestamp, TraceIndex,
};
use crate::eval::{evaluate_rankings, write_report_csv, MetricsReport};
use crate::score::{read_tables, write_tables, Component, ScoreTable};
use crate::tracescore::{score_query, IssueTexts};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("need at least 3 common projects to compare, found {0}")]
    InsufficientOverlap(usize),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data(_) | PipelineError::Io(_) | PipelineError::InsufficientOverlap(_) => 2,
            PipelineError::Invariant(_) => 3,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> PipelineError {
    PipelineError::Data(e.to_string())
}

/// A resolved bug with linked fix commits, evaluated as a query.
#[derive(Debug, Clone)]
pub struct Query {
    pub id: String,
    pub created: Timestamp,
    pub resolved: Timestamp,
    pub truth: BTreeSet<String>,
    pub snapshot: FileSnapshot,
}

pub struct Dataset {
    pub corpus: IssueCorpus,
    pub log: CommitLog,
    pub index: TraceIndex,
    /// In creation order, ties by id.
    pub queries: Vec<Query>,
}

impl Dataset {
    pub fn truth_map(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.queries.iter().map(|q| (q.id.clone(), q.truth.clone())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub project: String,
    pub issues: usize,
    pub bugs: usize,
    pub features: usize,
    pub rejected: Vec<Rejection>,
    pub commits: usize,
    pub links: usize,
    pub queries: usize,
    pub queries_with_empty_truth: Vec<String>,
}

pub fn ingest(cfg: &RunConfig) -> Result<Dataset, PipelineError> {
    let corpus = load_issues(&cfg.issues, IssueFormat::from_path(&cfg.issues)).map_err(data)?;
    let log = load_commits(&cfg.commits, SourceFilter::new(cfg.extensions.iter())).map_err(data)?;
    let explicit = match &cfg.links {
        Some(p) => load_links(p).map_err(data)?,
        None => Vec::new(),
    };
    let index = link_issues_commits(&corpus, &log, &explicit);
    let mut pending: Vec<(String, Timestamp, Timestamp, BTreeSet<String>)> = Vec::new();
    for bug in corpus.bugs() {
        let Some(resolved) = bug.resolved else { continue };
        if !index.has_commits(&bug.id) {
            continue;
        }
        let truth = ground_truth(bug, &index, &log, cfg.truth_policy).map_err(data)?;
        pending.push((bug.id.clone(), bug.created, resolved, truth));
    }
    pending.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let instants: Vec<Timestamp> = pending.iter().map(|p| p.1).collect();
    let snapshots = SnapshotTimeline::new(&log).snapshots_at(&instants);
    let queries = pending
        .into_iter()
        .zip(snapshots)
        .map(|((id, created, resolved, truth), snapshot)| Query { id, created, resolved, truth, snapshot })
        .collect();
    Ok(Dataset { corpus, log, index, queries })
}

pub fn ingest_summary(cfg: &RunConfig, ds: &Dataset) -> IngestSummary {
    IngestSummary {
        project: cfg.project.clone(),
        issues: ds.corpus.len(),
        bugs: ds.corpus.bugs().count(),
        features: ds.corpus.len() - ds.corpus.bugs().count(),
        rejected: ds.corpus.rejected().to_vec(),
        commits: ds.log.len(),
        links: ds.index.link_count(),
        queries: ds.queries.len(),
        queries_with_empty_truth: ds.queries.iter().filter(|q| q.truth.is_empty()).map(|q| q.id.clone()).collect(),
    }
}

/// Temporal split of the queries, or `None` when there are too few.
pub fn split_queries(cfg: &RunConfig, ds: &Dataset) -> Option<SplitRecord> {
    let bugs: Vec<(String, Timestamp)> = ds.queries.iter().map(|q| (q.id.clone(), q.resolved)).collect();
    split_train_test(&bugs, cfg.split_ratio).ok().map(|(train, test)| SplitRecord { train, test })
}

pub fn score_trace(cfg: &RunConfig, ds: &Dataset) -> Vec<ScoreTable> {
    let texts = IssueTexts::build(&ds.corpus);
    ds.queries
        .par_iter()
        .map(|q| {
            let query = ds.corpus.get(&q.id).expect("query comes from the corpus");
            score_query(query, &ds.corpus, &ds.index, &ds.log, &texts, &q.snapshot, cfg.cutoff, cfg.size_limits).1
        })
        .collect()
}

/// History scores; without leakage allowed, every contributing commit is audited.
pub fn score_history(cfg: &RunConfig, ds: &Dataset) -> Result<(Vec<ScoreTable>, HistoryAudit), PipelineError> {
    cfg.bugcache.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    let bug_ids = bug_id_set(&ds.corpus);
    let results: Vec<Result<(ScoreTable, usize), PipelineError>> = ds
        .queries
        .par_iter()
        .map(|q| {
            let query = ds.corpus.get(&q.id).expect("query comes from the corpus");
            let commits = find_fix_commits(&ds.log, &bug_ids, query, &cfg.bugcache);
            if !cfg.bugcache.allow_leakage {
                audit_leakage(query, &commits).map_err(|e| PipelineError::Invariant(e.to_string()))?;
            }
            Ok((bugcache_score(&commits, query, &cfg.bugcache, &q.snapshot), commits.len()))
        })
        .collect();
    let mut tables = Vec::with_capacity(results.len());
    let mut checked = 0;
    for r in results {
        let (t, n) = r?;
        tables.push(t);
        checked += n;
    }
    let audit = HistoryAudit {
        queries: ds.queries.len(),
        commits_checked: if cfg.bugcache.allow_leakage { 0 } else { checked },
        violations: 0,
        leakage_allowed: cfg.bugcache.allow_leakage,
    };
    Ok((tables, audit))
}

fn source_provider(cfg: &RunConfig) -> Result<Box<dyn SourceProvider>, PipelineError> {
    match &cfg.sources {
        Some(dir) if dir.join(".git").exists() => Ok(Box::new(GitSource::new(dir))),
        Some(dir) if dir.is_dir() => Ok(Box::new(DirectorySource::new(dir))),
        Some(dir) => Err(PipelineError::Config(format!("sources {} is not a directory", dir.display()))),
        None if cfg.commits.is_dir() => Ok(Box::new(GitSource::new(&cfg.commits))),
        None => Err(PipelineError::Config(
            "structure scoring needs `sources` (a checkout) or a git repository as `commits`".into(),
        )),
    }
}

/// Index over the union of the window's snapshots. Each file is read as of the
/// latest query in the window whose snapshot contains it.
fn window_index(
    window: &[&Query],
    provider: &dyn SourceProvider,
    cfg: &RunConfig,
) -> Result<StructuredIndex, PipelineError> {
    let mut latest: BTreeMap<&str, Timestamp> = BTreeMap::new();
    for q in window {
        for f in &q.snapshot.files {
            let slot = latest.entry(f.as_str()).or_insert(q.created);
            *slot = (*slot).max(q.created);
        }
    }
    let mut by_instant: BTreeMap<Timestamp, Vec<&str>> = BTreeMap::new();
    for (f, t) in latest {
        by_instant.entry(t).or_default().push(f);
    }
    let mut docs: BTreeMap<String, CodeFields> = BTreeMap::new();
    for (instant, files) in by_instant {
        let contents = provider.read_many(&files, instant).map_err(data)?;
        let parsed: Vec<(String, CodeFields)> = files
            .par_iter()
            .zip(contents.par_iter())
            .map(|(path, content)| {
                let lang = Language::from_path(path).unwrap_or(cfg.language);
                (path.to_string(), content.as_deref().map(|c| extract_fields(c, lang)).unwrap_or_default())
            })
            .collect();
        docs.extend(parsed);
    }
    Ok(StructuredIndex::build(&docs, cfg.bm25))
}

pub fn score_structure(cfg: &RunConfig, ds: &Dataset) -> Result<Vec<ScoreTable>, PipelineError> {
    let provider = source_provider(cfg)?;
    let provider = provider.as_ref();
    let score = |q: &Query, index: &StructuredIndex| -> Result<ScoreTable, PipelineError> {
        let query = ds.corpus.get(&q.id).expect("query comes from the corpus");
        if index.is_empty() {
            return Ok(ScoreTable::new(q.id.clone(), Component::Structure));
        }
        structure_score(query, index, Some(&q.snapshot)).map_err(data)
    };
    match cfg.snapshot_granularity {
        SnapshotGranularity::PerBug => ds
            .queries
            .par_iter()
            .map(|q| {
                let index =
                    StructuredIndex::from_sources(&q.snapshot.files, provider, q.created, cfg.language, cfg.bm25)
                        .map_err(data)?;
                score(q, &index)
            })
            .collect(),
        SnapshotGranularity::PerWindow => {
            let windows: Vec<Vec<&Query>> = match split_queries(cfg, ds) {
                Some(split) => {
                    let train: BTreeSet<&str> = split.train.iter().map(String::as_str).collect();
                    let (a, b): (Vec<&Query>, Vec<&Query>) =
                        ds.queries.iter().partition(|q| train.contains(q.id.as_str()));
                    vec![a, b]
                }
                None => vec![ds.queries.iter().collect()],
            };
            let mut tables: BTreeMap<String, ScoreTable> = BTreeMap::new();
            for window in windows.iter().filter(|w| !w.is_empty()) {
                let index = window_index(window, provider, cfg)?;
                let scored: Vec<Result<ScoreTable, PipelineError>> =
                    window.par_iter().map(|q| score(q, &index)).collect();
                for t in scored {
                    let t = t?;
                    tables.insert(t.bug_id.clone(), t);
                }
            }
            Ok(ds.queries.iter().map(|q| tables.remove(&q.id).expect("every query scored")).collect())
        }
    }
}

pub fn write_scores(dir: &Path, component: Component, tables: &[ScoreTable]) -> Result<(), PipelineError> {
    artifacts::write_csv_with(&dir.join(component.file_name()), |buf| write_tables(buf, component, tables))
}

pub fn read_scores(dir: &Path, component: Component) -> Result<BTreeMap<String, ScoreTable>, PipelineError> {
    let path = dir.join(component.file_name());
    let file = File::open(&path).map_err(|e| PipelineError::Data(format!("cannot read {}: {e}", path.display())))?;
    read_tables(file, component).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

pub fn build_features(
    ds: &Dataset,
    trace: &BTreeMap<String, ScoreTable>,
    history: &BTreeMap<String, ScoreTable>,
    structure: &BTreeMap<String, ScoreTable>,
) -> Result<Vec<FeatureRow>, PipelineError> {
    let mut rows = Vec::new();
    for q in &ds.queries {
        let empty = |c| ScoreTable::new(q.id.clone(), c);
        let (t, h, s) = (
            trace.get(&q.id).cloned().unwrap_or_else(|| empty(Component::Trace)),
            history.get(&q.id).cloned().unwrap_or_else(|| empty(Component::History)),
            structure.get(&q.id).cloned().unwrap_or_else(|| empty(Component::Structure)),
        );
        let tables = ComponentTables { trace: &t, history: &h, structure: &s };
        match assemble_features(&q.id, tables, &q.snapshot, &q.truth) {
            Ok(r) => rows.extend(r),
            Err(e) => warn!("skipping {}: {e}", q.id),
        }
    }
    Ok(rows)
}

/// Rankings of one composer together with what they were evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutput {
    pub kind: FusionKind,
    pub rankings: Vec<RankedList>,
    pub feature_importances: Option<[f64; 3]>,
    pub test_only: bool,
}

fn check_permutation(list: &RankedList, rows: &[FeatureRow]) -> Result<(), PipelineError> {
    let expected: BTreeSet<&str> = rows.iter().map(|r| r.file_path.as_str()).collect();
    let got: BTreeSet<&str> = list.paths().collect();
    if got != expected || list.len() != rows.len() {
        return Err(PipelineError::Invariant(format!("ranking for {} is not a permutation of its candidates", list.bug_id)));
    }
    Ok(())
}

/// Unsupervised composers rank every query; supervised ones train on the split's
/// training queries and rank its test queries.
pub fn fuse_all(
    cfg: &RunConfig,
    rows: &[FeatureRow],
    split: Option<&SplitRecord>,
) -> Result<Vec<FusionOutput>, PipelineError> {
    let by_bug = group_by_bug(rows);
    let mut outputs = Vec::new();
    for &kind in &cfg.composers {
        let spec = cfg.fusion_spec(kind);
        spec.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let output = match kind.model_kind() {
            None => {
                let rankings: Vec<RankedList> = by_bug
                    .par_iter()
                    .map(|(bug, rows)| spec.fuse(bug, rows).expect("unsupervised composer"))
                    .collect();
                FusionOutput { kind, rankings, feature_importances: None, test_only: false }
            }
            Some(model_kind) => {
                let split = split.ok_or_else(|| {
                    PipelineError::Data(format!("{} needs a train/test split; too few resolved bugs", kind.as_str()))
                })?;
                let seed = spec.seed.expect("validated");
                let mut train_rows = Vec::new();
                for bug in &split.train {
                    if let Some(r) = by_bug.get(bug) {
                        train_rows.extend(spec.prepare(r));
                    }
                }
                let balanced = undersample(&train_rows, seed).map_err(data)?;
                let model = train_model(model_kind, &balanced, &ModelParams::from_params(&spec.params), seed).map_err(data)?;
                let rankings = split
                    .test
                    .par_iter()
                    .filter_map(|bug| by_bug.get(bug).map(|r| predict_rank(&model, bug, &spec.prepare(r))))
                    .collect();
                FusionOutput { kind, rankings, feature_importances: model.feature_importances(), test_only: true }
            }
        };
        for list in &output.rankings {
            check_permutation(list, &by_bug[&list.bug_id])?;
        }
        info!(composer = kind.as_str(), queries = output.rankings.len(), "fused");
        outputs.push(output);
    }
    Ok(outputs)
}

pub fn evaluate_outputs(
    cfg: &RunConfig,
    ds: &Dataset,
    outputs: &[(FusionKind, Vec<RankedList>)],
) -> Result<ReportBundle, PipelineError> {
    let truth = ds.truth_map();
    let mut reports = Vec::new();
    for (kind, rankings) in outputs {
        reports.push(evaluate_rankings(&cfg.project, kind.as_str(), rankings, &truth).map_err(data)?);
    }
    let mut notes = vec![
        "candidates are all source files present when each bug was filed".to_string(),
        "unsupervised composers are evaluated on every query, supervised ones on the test split".to_string(),
    ];
    if cfg.snapshot_granularity == SnapshotGranularity::PerWindow {
        notes.push("structure index statistics are shared across each evaluation window".to_string());
    }
    Ok(ReportBundle { project: cfg.project.clone(), reports, notes })
}

pub fn write_reports(dir: &Path, bundle: &ReportBundle) -> Result<(), PipelineError> {
    write_json(&dir.join(REPORT_JSON), bundle)?;
    for (i, report) in bundle.reports.iter().enumerate() {
        let one = std::slice::from_ref(report);
        artifacts::write_csv_with(&dir.join(report_csv_file(&report.composer)), |b| write_report_csv(b, one))?;
        if i == 0 {
            artifacts::write_csv_with(&dir.join(REPORT_CSV), |b| write_report_csv(b, one))?;
        }
    }
    Ok(())
}

pub fn write_features_file(dir: &Path, rows: &[FeatureRow]) -> Result<(), PipelineError> {
    artifacts::write_csv_with(&dir.join(FEATURES), |b| write_features(b, rows))
}

pub fn read_features_file(dir: &Path) -> Result<Vec<FeatureRow>, PipelineError> {
    let path = dir.join(FEATURES);
    let file = File::open(&path).map_err(|e| PipelineError::Data(format!("cannot read {}: {e}", path.display())))?;
    read_features(file).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

pub fn write_rankings_file(dir: &Path, kind: FusionKind, rankings: &[RankedList]) -> Result<(), PipelineError> {
    artifacts::write_csv_with(&dir.join(rankings_file(kind.as_str())), |b| write_rankings(b, rankings))
}

pub fn read_rankings_file(dir: &Path, kind: FusionKind) -> Result<Vec<RankedList>, PipelineError> {
    let path = dir.join(rankings_file(kind.as_str()));
    let file = File::open(&path).map_err(|e| PipelineError::Data(format!("cannot read {}: {e}", path.display())))?;
    read_rankings(file).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

fn manifest(
    cfg: &RunConfig,
    split: Option<SplitRecord>,
    outputs: &[FusionOutput],
    audit: Option<HistoryAudit>,
) -> Result<RunManifest, PipelineError> {
    Ok(RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        project: cfg.project.clone(),
        seed: cfg.seed,
        composers: cfg.composers.iter().map(|k| cfg.fusion_spec(*k)).collect(),
        config: cfg.clone(),
        input_hashes: input_hashes(cfg)?,
        split,
        feature_importances: outputs
            .iter()
            .filter_map(|o| o.feature_importances.map(|f| (o.kind.as_str().to_string(), f)))
            .collect(),
        history_audit: audit,
    })
}

/// Runs `f` inside a worker pool sized by the config.
pub fn with_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| PipelineError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Summary of a full run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub bundle: ReportBundle,
    pub manifest: RunManifest,
}

/// Full pipeline; every artifact lands in `cfg.workdir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    with_pool(cfg, || {
        let dir = cfg.workdir.as_path();
        let ds = ingest(cfg)?;
        info!(queries = ds.queries.len(), "ingested");
        write_json(&dir.join(INGEST_SUMMARY), &ingest_summary(cfg, &ds))?;
        let trace = score_trace(cfg, &ds);
        let (history, audit) = score_history(cfg, &ds)?;
        let structure = score_structure(cfg, &ds)?;
        write_scores(dir, Component::Trace, &trace)?;
        write_scores(dir, Component::History, &history)?;
        write_scores(dir, Component::Structure, &structure)?;
        let keyed = |v: Vec<ScoreTable>| v.into_iter().map(|t| (t.bug_id.clone(), t)).collect::<BTreeMap<_, _>>();
        let rows = build_features(&ds, &keyed(trace), &keyed(history), &keyed(structure))?;
        write_features_file(dir, &rows)?;
        let split = split_queries(cfg, &ds);
        let outputs = fuse_all(cfg, &rows, split.as_ref())?;
        for o in &outputs {
            write_rankings_file(dir, o.kind, &o.rankings)?;
        }
        let ranked: Vec<(FusionKind, Vec<RankedList>)> = outputs.iter().map(|o| (o.kind, o.rankings.clone())).collect();
        let bundle = evaluate_outputs(cfg, &ds, &ranked)?;
        write_reports(dir, &bundle)?;
        let manifest = manifest(cfg, split, &outputs, Some(audit))?;
        write_json(&dir.join(MANIFEST), &manifest)?;
        Ok(RunSummary { bundle, manifest })
    })?
}

/// `ingest` stage on its own.
pub fn run_ingest(cfg: &RunConfig) -> Result<IngestSummary, PipelineError> {
    let ds = ingest(cfg)?;
    let summary = ingest_summary(cfg, &ds);
    write_json(&cfg.workdir.join(INGEST_SUMMARY), &summary)?;
    Ok(summary)
}

/// `score` stage for the chosen components.
pub fn run_score(cfg: &RunConfig, components: &[Component]) -> Result<(), PipelineError> {
    cfg.validate()?;
    with_pool(cfg, || {
        let ds = ingest(cfg)?;
        for c in components {
            let tables = match c {
                Component::Trace => score_trace(cfg, &ds),
                Component::History => score_history(cfg, &ds)?.0,
                Component::Structure => score_structure(cfg, &ds)?,
            };
            write_scores(&cfg.workdir, *c, &tables)?;
        }
        Ok(())
    })?
}

/// `fuse` stage from persisted score tables.
pub fn run_fuse(cfg: &RunConfig) -> Result<Vec<FusionOutput>, PipelineError> {
    cfg.validate()?;
    with_pool(cfg, || {
        let dir = cfg.workdir.as_path();
        let ds = ingest(cfg)?;
        let rows = build_features(
            &ds,
            &read_scores(dir, Component::Trace)?,
            &read_scores(dir, Component::History)?,
            &read_scores(dir, Component::Structure)?,
        )?;
        write_features_file(dir, &rows)?;
        let split = split_queries(cfg, &ds);
        let outputs = fuse_all(cfg, &rows, split.as_ref())?;
        for o in &outputs {
            write_rankings_file(dir, o.kind, &o.rankings)?;
        }
        write_json(&dir.join(MANIFEST), &manifest(cfg, split, &outputs, None)?)?;
        Ok(outputs)
    })?
}

/// `evaluate` stage from persisted rankings.
pub fn run_evaluate(cfg: &RunConfig) -> Result<ReportBundle, PipelineError> {
    let ds = ingest(cfg)?;
    let mut ranked = Vec::new();
    for &kind in &cfg.composers {
        ranked.push((kind, read_rankings_file(&cfg.workdir, kind)?));
    }
    let bundle = evaluate_outputs(cfg, &ds, &ranked)?;
    write_reports(&cfg.workdir, &bundle)?;
    Ok(bundle)
}

/// Cross-project table (one row per project plus the average) for one composer.
pub fn report_table(bundles: &[ReportBundle], composer: Option<&str>, out: &Path) -> Result<Vec<MetricsReport>, PipelineError> {
    let reports: Vec<MetricsReport> = bundles.iter().filter_map(|b| b.for_composer(composer).cloned()).collect();
    if reports.is_empty() {
        return Err(PipelineError::Data("no matching reports".into()));
    }
    artifacts::write_csv_with(out, |b| write_report_csv(b, &reports))?;
    Ok(reports)
}
