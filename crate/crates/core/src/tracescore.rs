//! Similar-reports component over the issue trace graph.
//!
//! For a query bug, previously resolved issues (bugs and features) are selected by
//! age and size, weighted by textual similarity to the query (or 1 when an explicit
//! trace link exists), and each file they fixed receives
//! `Σ sim(a, query)² / |fix(a)|` over the artifacts that touched it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    changed_source_files, CommitLog, FileSnapshot, IssueCorpus, IssueKind, IssueReport,
    TraceIndex, SECONDS_PER_DAY,
};
use crate::score::{Component, ScoreTable};
use crate::textprep::{build_tfidf, cosine, preprocess, TokenList, VectorSpace};

pub const LOOKBACK_DAYS: i64 = 365;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffMode {
    /// Artifacts resolved within the year before the query was filed, or any time after.
    #[default]
    Relaxed,
    /// Additionally, only artifacts resolved before the query was filed.
    Strict,
}

impl CutoffMode {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "relaxed" => Some(CutoffMode::Relaxed),
            "strict" => Some(CutoffMode::Strict),
            _ => None,
        }
    }
}

/// Upper bounds on the number of source files an artifact's fix may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeLimits {
    pub bug: usize,
    pub feature: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        Self { bug: 10, feature: 20 }
    }
}

impl SizeLimits {
    pub fn for_kind(&self, kind: IssueKind) -> usize {
        match kind {
            IssueKind::Bug => self.bug,
            IssueKind::Feature => self.feature,
        }
    }
}

/// Query bug → weighted artifacts → files each artifact fixed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceGraph {
    pub root: String,
    pub edges: BTreeMap<String, f64>,
    pub fix_sets: BTreeMap<String, BTreeSet<String>>,
}

impl TraceGraph {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Preprocessed `summary description` text for every issue, computed once.
#[derive(Debug, Clone, Default)]
pub struct IssueTexts(HashMap<String, TokenList>);

impl IssueTexts {
    pub fn build(corpus: &IssueCorpus) -> Self {
        IssueTexts(corpus.iter().map(|i| (i.id.clone(), preprocess(&i.text()))).collect())
    }

    pub fn get(&self, id: &str) -> TokenList {
        self.0.get(id).cloned().unwrap_or_default()
    }
}

/// Candidate artifacts for `query` under the lookback window, cut-off mode and size limits.
pub fn select_artifacts(
    query: &IssueReport,
    corpus: &IssueCorpus,
    index: &TraceIndex,
    log: &CommitLog,
    mode: CutoffMode,
    limits: SizeLimits,
) -> BTreeSet<String> {
    let window_start = query.created - LOOKBACK_DAYS * SECONDS_PER_DAY;
    corpus
        .iter()
        .filter(|a| a.id != query.id && index.has_commits(&a.id))
        .filter(|a| match a.resolved {
            Some(r) => r > window_start && (mode == CutoffMode::Relaxed || r < query.created),
            None => false,
        })
        .filter(|a| changed_source_files(&a.id, index, log).len() <= limits.for_kind(a.kind))
        .map(|a| a.id.clone())
        .collect()
}

/// TF-IDF space over the query and its artifacts.
pub fn artifact_space(query: &IssueReport, artifacts: &BTreeSet<String>, texts: &IssueTexts) -> VectorSpace {
    let mut docs: BTreeMap<String, TokenList> =
        artifacts.iter().map(|id| (id.clone(), texts.get(id))).collect();
    docs.insert(query.id.clone(), texts.get(&query.id));
    build_tfidf(&docs).expect("query document is always present")
}

/// Builds the trace graph: cosine edges (1.0 for explicit links) and fix sets restricted
/// to files that still exist when the query is filed. Artifacts left with no files drop out.
pub fn build_trace_graph(
    query: &IssueReport,
    artifacts: &BTreeSet<String>,
    corpus: &IssueCorpus,
    space: &VectorSpace,
    index: &TraceIndex,
    log: &CommitLog,
    snapshot: &FileSnapshot,
) -> TraceGraph {
    let empty = Default::default();
    let query_vec = space.doc_vector(&query.id).unwrap_or(&empty);
    let mut graph = TraceGraph { root: query.id.clone(), ..Default::default() };
    for id in artifacts {
        let Some(artifact) = corpus.get(id) else { continue };
        let fix: BTreeSet<String> = changed_source_files(id, index, log)
            .into_iter()
            .filter(|f| snapshot.contains(f))
            .collect();
        if fix.is_empty() {
            continue;
        }
        let weight = if query.is_linked_to(artifact) {
            1.0
        } else {
            space.doc_vector(id).map_or(0.0, |v| cosine(query_vec, v))
        };
        graph.edges.insert(id.clone(), weight);
        graph.fix_sets.insert(id.clone(), fix);
    }
    graph
}

/// `Σ_{a : s ∈ fix(a)} w(a)² / |fix(a)|` for every file reachable from the root.
pub fn trace_score(graph: &TraceGraph) -> ScoreTable {
    let mut table = ScoreTable::new(graph.root.clone(), Component::Trace);
    for (artifact, &weight) in &graph.edges {
        let Some(fix) = graph.fix_sets.get(artifact) else { continue };
        if fix.is_empty() {
            continue;
        }
        let share = weight * weight / fix.len() as f64;
        for file in fix {
            table.add(file, share);
        }
    }
    table
}

/// Convenience wrapper running selection, graph construction and scoring for one query.
#[allow(clippy::too_many_arguments)]
pub fn score_query(
    query: &IssueReport,
    corpus: &IssueCorpus,
    index: &TraceIndex,
    log: &CommitLog,
    texts: &IssueTexts,
    snapshot: &FileSnapshot,
    mode: CutoffMode,
    limits: SizeLimits,
) -> (TraceGraph, ScoreTable) {
    let artifacts = select_artifacts(query, corpus, index, log, mode, limits);
    let space = artifact_space(query, &artifacts, texts);
    let graph = build_trace_graph(query, &artifacts, corpus, &space, index, log, snapshot);
    let table = trace_score(&graph);
    (graph, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{link_issues_commits, CommitRecord, FileChange, SourceFilter};

    const DAY: i64 = SECONDS_PER_DAY;

    fn graph(edges: &[(&str, f64, &[&str])]) -> TraceGraph {
        TraceGraph {
            root: "Q".into(),
            edges: edges.iter().map(|(a, w, _)| (a.to_string(), *w)).collect(),
            fix_sets: edges
                .iter()
                .map(|(a, _, f)| (a.to_string(), f.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }

    #[test]
    fn single_artifact_splits_squared_similarity() {
        let t = trace_score(&graph(&[("A", 0.8, &["s1", "s2"])]));
        assert!((t.get("s1") - 0.32).abs() < 1e-12);
        assert!((t.get("s2") - 0.32).abs() < 1e-12);
    }

    #[test]
    fn explicit_link_adds_quarter_share() {
        let t = trace_score(&graph(&[("A", 0.8, &["s1", "s2"]), ("B", 1.0, &["s1", "s2", "s3", "s4"])]));
        assert!((t.get("s1") - 0.57).abs() < 1e-12);
        assert!((t.get("s3") - 0.25).abs() < 1e-12);
        assert!(trace_score(&TraceGraph::default()).is_empty());
    }

    struct Fixture {
        corpus: IssueCorpus,
        log: CommitLog,
        index: TraceIndex,
    }

    fn fixture() -> Fixture {
        let q_created = 400 * DAY;
        let corpus = IssueCorpus::from_issues(vec![
            IssueReport::new("P-1", IssueKind::Bug, q_created).with_text("parser crash on token", ""),
            IssueReport::new("P-2", IssueKind::Bug, 100 * DAY).with_resolved(200 * DAY).with_text("parser crash", ""),
            IssueReport::new("P-3", IssueKind::Bug, 390 * DAY).with_resolved(q_created + 4 * DAY).with_text("token", ""),
            IssueReport::new("P-4", IssueKind::Bug, 300 * DAY).with_resolved(310 * DAY),
            IssueReport::new("P-5", IssueKind::Feature, 10 * DAY).with_resolved(20 * DAY),
            IssueReport::new("P-6", IssueKind::Feature, 300 * DAY).with_resolved(320 * DAY).with_links(["P-1"]).with_text("unrelated words", ""),
        ])
        .unwrap();
        let eleven: Vec<FileChange> = (0..11).map(|i| FileChange::modified(format!("F{i}.java"))).collect();
        let log = CommitLog::new(
            vec![
                CommitRecord::new("init", 0, "init").with_changes(
                    (0..11).map(|i| FileChange::added(format!("F{i}.java"))).chain([FileChange::added("Gone.java")]).collect(),
                ),
                CommitRecord::new("c2", 150 * DAY, "P-2 fix").with_changes(vec![FileChange::modified("F0.java"), FileChange::modified("F1.java"), FileChange::modified("F2.java")]),
                CommitRecord::new("c3", 395 * DAY, "P-3 fix").with_changes(vec![FileChange::modified("F3.java")]),
                CommitRecord::new("c4", 305 * DAY, "P-4 format").with_changes(eleven),
                CommitRecord::new("c5", 15 * DAY, "P-5 gone").with_changes(vec![FileChange::modified("Gone.java")]),
                CommitRecord::new("c6", 315 * DAY, "P-6 feature").with_changes(vec![FileChange::modified("F5.java"), FileChange::modified("Gone.java")]),
                CommitRecord::new("c7", 350 * DAY, "drop").with_changes(vec![FileChange::deleted("Gone.java")]),
            ],
            SourceFilter::new([".java"]),
        )
        .unwrap();
        let index = link_issues_commits(&corpus, &log, &[]);
        Fixture { corpus, log, index }
    }

    #[test]
    fn selection_rules() {
        let f = fixture();
        let q = f.corpus.get("P-1").unwrap();
        let relaxed = select_artifacts(q, &f.corpus, &f.index, &f.log, CutoffMode::Relaxed, SizeLimits::default());
        let strict = select_artifacts(q, &f.corpus, &f.index, &f.log, CutoffMode::Strict, SizeLimits::default());
        // P-2 fixed 200 days before, P-3 fixed 4 days after filing, P-4 too large, P-5 too old
        assert_eq!(relaxed, BTreeSet::from(["P-2".to_string(), "P-3".into(), "P-6".into()]));
        assert_eq!(strict, BTreeSet::from(["P-2".to_string(), "P-6".into()]));
        assert!(strict.is_subset(&relaxed));
    }

    #[test]
    fn graph_applies_link_override_and_snapshot() {
        let f = fixture();
        let q = f.corpus.get("P-1").unwrap();
        let texts = IssueTexts::build(&f.corpus);
        let snapshot = crate::corpus::snapshot_files(&f.log, q.created);
        let (graph, table) = score_query(q, &f.corpus, &f.index, &f.log, &texts, &snapshot, CutoffMode::Relaxed, SizeLimits::default());
        assert_eq!(graph.edges["P-6"], 1.0);
        assert_eq!(graph.fix_sets["P-6"], BTreeSet::from(["F5.java".to_string()]));
        assert!(graph.edges["P-2"] > 0.0 && graph.edges["P-2"] < 1.0);
        assert_eq!(table.get("F5.java"), 1.0);
        assert_eq!(table.get("Gone.java"), 0.0);
    }
}
