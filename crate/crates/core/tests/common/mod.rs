//! Fixture access and brute-force oracles shared by the integration tests.
//!
//! The oracles re-read the raw fixture files and recompute everything with plain
//! loops; they only borrow `preprocess` and `parse_timestamp` from the crate.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::Value;
use traceloc::corpus::parse_timestamp;
use traceloc::pipeline::RunConfig;
use traceloc::textprep::preprocess;

pub const DAY: i64 = 86_400;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo")
}

pub fn fixture_conf() -> PathBuf {
    fixture_dir().join("demo.conf")
}

pub fn fixture_config(workdir: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&fixture_conf()).expect("fixture config loads");
    cfg.workdir = workdir.to_path_buf();
    cfg
}

#[derive(Debug, Clone)]
pub struct RawIssue {
    pub id: String,
    pub is_bug: bool,
    pub text: String,
    pub created: i64,
    pub resolved: Option<i64>,
    pub links: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RawChange {
    pub old: Option<String>,
    pub new: Option<String>,
    pub kind: String,
}

#[derive(Debug, Clone)]
pub struct RawCommit {
    pub hash: String,
    pub ts: i64,
    pub message: String,
    pub changes: Vec<RawChange>,
}

pub struct RawFixture {
    pub issues: Vec<RawIssue>,
    pub commits: Vec<RawCommit>,
    pub explicit: Vec<(String, String)>,
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn time(v: &Value) -> Option<i64> {
    v.as_str().and_then(parse_timestamp)
}

fn is_source(path: &str) -> bool {
    path.ends_with(".java")
}

impl RawFixture {
    pub fn load() -> Self {
        let dir = fixture_dir();
        let issues = lines(&dir.join("issues.jsonl"))
            .into_iter()
            .map(|o| RawIssue {
                id: o["id"].as_str().unwrap().to_string(),
                is_bug: o["kind"].as_str() == Some("bug"),
                text: format!("{} {}", o["summary"].as_str().unwrap(), o["description"].as_str().unwrap_or("")),
                created: time(&o["created_date"]).unwrap(),
                resolved: time(&o["resolved_date"]),
                links: o["links"]
                    .as_array()
                    .map(|a| a.iter().map(|v| v.as_str().unwrap().to_string()).collect())
                    .unwrap_or_default(),
            })
            .collect();
        let mut commits: Vec<RawCommit> = lines(&dir.join("commits.jsonl"))
            .into_iter()
            .map(|o| RawCommit {
                hash: o["hash"].as_str().unwrap().to_string(),
                ts: time(&o["timestamp"]).unwrap(),
                message: o["message"].as_str().unwrap().to_string(),
                changes: o["changes"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|c| RawChange {
                        old: c["old"].as_str().map(str::to_string),
                        new: c["new"].as_str().map(str::to_string),
                        kind: c["kind"].as_str().unwrap().to_string(),
                    })
                    .collect(),
            })
            .collect();
        commits.sort_by_key(|c| c.ts);
        let explicit = std::fs::read_to_string(dir.join("links.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .filter_map(|l| l.split_once(','))
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        RawFixture { issues, commits, explicit }
    }

    pub fn issue(&self, id: &str) -> &RawIssue {
        self.issues.iter().find(|i| i.id == id).unwrap()
    }

    /// Hashes of the commits linked to `id`: side-file links plus exact message tokens.
    pub fn linked_commits(&self, id: &str) -> Vec<&RawCommit> {
        self.commits
            .iter()
            .filter(|c| {
                self.explicit.iter().any(|(i, h)| i == id && *h == c.hash)
                    || c.message
                        .split(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '-' || ch == '_'))
                        .any(|tok| tok.eq_ignore_ascii_case(id))
            })
            .collect()
    }

    /// Every source path touched by the issue's commits (new name, or old name for deletions).
    pub fn fix_files(&self, id: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in self.linked_commits(id) {
            for ch in &c.changes {
                let p = ch.new.clone().or_else(|| ch.old.clone()).unwrap();
                let src = ch.old.as_deref().is_some_and(is_source) || ch.new.as_deref().is_some_and(is_source);
                if src {
                    out.insert(p);
                }
            }
        }
        out
    }

    /// Source files existing just before `t`, replayed change by change.
    pub fn snapshot(&self, t: i64) -> BTreeSet<String> {
        let mut files = BTreeSet::new();
        for c in self.commits.iter().filter(|c| c.ts < t) {
            for ch in &c.changes {
                match ch.kind.as_str() {
                    "added" | "modified" => {
                        let p = ch.new.clone().unwrap();
                        if is_source(&p) {
                            files.insert(p);
                        }
                    }
                    "deleted" => {
                        files.remove(ch.old.as_deref().unwrap());
                    }
                    "renamed" => {
                        files.remove(ch.old.as_deref().unwrap());
                        let p = ch.new.clone().unwrap();
                        if is_source(&p) {
                            files.insert(p);
                        }
                    }
                    other => panic!("unknown kind {other}"),
                }
            }
        }
        files
    }

    /// Resolved bugs with at least one linked commit.
    pub fn queries(&self) -> Vec<&RawIssue> {
        self.issues
            .iter()
            .filter(|i| i.is_bug && i.resolved.is_some() && !self.linked_commits(&i.id).is_empty())
            .collect()
    }

    /// Artifact ids for `q` by the selection rules, strict or relaxed.
    pub fn artifacts(&self, q: &RawIssue, strict: bool) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.issues {
            let Some(r) = a.resolved else { continue };
            if a.id == q.id || self.linked_commits(&a.id).is_empty() {
                continue;
            }
            if r <= q.created - 365 * DAY || (strict && r >= q.created) {
                continue;
            }
            let limit = if a.is_bug { 10 } else { 20 };
            if self.fix_files(&a.id).len() > limit {
                continue;
            }
            out.insert(a.id.clone());
        }
        out
    }

    /// Trace scores for `q` by looping over artifacts × files.
    pub fn trace_scores(&self, q: &RawIssue, strict: bool) -> BTreeMap<String, f64> {
        let artifacts = self.artifacts(q, strict);
        let mut ids: Vec<&str> = artifacts.iter().map(String::as_str).collect();
        ids.push(&q.id);
        let docs: BTreeMap<&str, Vec<String>> =
            ids.iter().map(|id| (*id, preprocess(&self.issue(id).text).0)).collect();
        let weights = dense_tfidf(&docs);
        let snapshot = self.snapshot(q.created);
        let mut scores: BTreeMap<String, f64> = BTreeMap::new();
        for a in &artifacts {
            let fix: Vec<String> = self.fix_files(a).into_iter().filter(|f| snapshot.contains(f)).collect();
            if fix.is_empty() {
                continue;
            }
            let linked = q.links.contains(a) || self.issue(a).links.contains(&q.id);
            let w = if linked { 1.0 } else { dense_cosine(&weights[q.id.as_str()], &weights[a.as_str()]) };
            for f in &snapshot {
                if fix.contains(f) {
                    *scores.entry(f.clone()).or_insert(0.0) += w * w / fix.len() as f64;
                }
            }
        }
        scores
    }
}

/// Dense L2-normalized tf·idf rows over the sorted vocabulary, smooth idf.
pub fn dense_tfidf<'a>(docs: &BTreeMap<&'a str, Vec<String>>) -> BTreeMap<&'a str, Vec<f64>> {
    let vocab: Vec<&String> = docs.values().flatten().collect::<BTreeSet<_>>().into_iter().collect();
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = docs.values().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    docs.iter()
        .map(|(id, toks)| {
            let mut v: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| toks.iter().filter(|x| x == t).count() as f64 * w)
                .collect();
            let norm = v.iter().filter(|x| **x != 0.0).map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            (*id, v)
        })
        .collect()
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let sq = |v: &[f64]| v.iter().filter(|x| **x != 0.0).map(|x| x * x).sum::<f64>();
    let denom = (sq(a) * sq(b)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).filter(|(x, y)| **x != 0.0 && **y != 0.0).map(|(x, y)| x * y).sum();
    (dot / denom).clamp(0.0, 1.0)
}

/// AP, first relevant rank and Top-k hits by rescanning every prefix.
pub struct PrefixMetrics {
    pub ap: f64,
    pub first: Option<usize>,
    pub top: [bool; 3],
}

pub fn prefix_metrics(ranking: &[String], truth: &BTreeSet<String>) -> PrefixMetrics {
    let mut ap = 0.0;
    let mut first = None;
    for k in 1..=ranking.len() {
        let prefix = &ranking[..k];
        let hits = prefix.iter().filter(|p| truth.contains(*p)).count();
        if truth.contains(&ranking[k - 1]) {
            ap += hits as f64 / k as f64;
        }
        if first.is_none() && hits > 0 {
            first = Some(k);
        }
    }
    let hit_within = |k: usize| ranking.iter().take(k).any(|p| truth.contains(p));
    PrefixMetrics { ap: ap / truth.len() as f64, first, top: [hit_within(1), hit_within(5), hit_within(10)] }
}

/// Okapi BM25 of `query` (terms with multiplicity) against each document, naive loops.
pub fn bm25_naive(docs: &[Vec<String>], query: &[String], k1: f64, b: f64) -> Vec<f64> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    docs.iter()
        .map(|d| {
            if avg == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for t in query {
                let df = docs.iter().filter(|x| x.contains(t)).count() as f64;
                if df == 0.0 {
                    continue;
                }
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0);
                let tf = d.iter().filter(|x| *x == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * d.len() as f64 / avg));
            }
            s
        })
        .collect()
}
