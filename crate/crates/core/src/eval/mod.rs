//! Ranking metrics (AP, MAP, MRR, Top-k), report files and comparison statistics.

mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use stats::{kolmogorov_sf, ks_pvalue, ks_test, paired_ttest, KsMethod, KsResult, TTestResult, EXACT_KS_LIMIT};

use crate::composer::RankedList;

pub const METRICS: [&str; 5] = ["MAP", "MRR", "Top1", "Top5", "Top10"];

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("ground truth is empty")]
    EmptyTruth,
    #[error("no bugs to aggregate")]
    NoBugs,
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("paired test needs at least 3 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("differences have zero variance")]
    ZeroVariance,
    #[error("sample is empty")]
    EmptySample,
}

/// `Σ P(i)·pos(i) / |truth|` over the ranking.
pub fn average_precision(ranking: &RankedList, truth: &BTreeSet<String>) -> Result<f64, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, path) in ranking.paths().enumerate() {
        if truth.contains(path) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / truth.len() as f64)
}

/// 1-based rank of the first buggy file, if any was retrieved.
pub fn first_relevant_rank(ranking: &RankedList, truth: &BTreeSet<String>) -> Option<usize> {
    ranking.paths().position(|p| truth.contains(p)).map(|i| i + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugResult {
    pub bug_id: String,
    pub average_precision: f64,
    pub first_rank: Option<usize>,
    pub reciprocal_rank: Option<f64>,
    pub truth_size: usize,
    pub candidates: usize,
}

pub fn evaluate_bug(ranking: &RankedList, truth: &BTreeSet<String>) -> Result<BugResult, EvalError> {
    let ap = average_precision(ranking, truth)?;
    let first = first_relevant_rank(ranking, truth);
    Ok(BugResult {
        bug_id: ranking.bug_id.clone(),
        average_precision: ap,
        first_rank: first,
        reciprocal_rank: first.map(|r| 1.0 / r as f64),
        truth_size: truth.len(),
        candidates: ranking.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub project: String,
    pub composer: String,
    pub bug_count: usize,
    /// Bugs left out because their ground truth is empty.
    pub excluded_empty_truth: Vec<String>,
    /// Bugs with no buggy file among the candidates: AP 0, not counted in MRR.
    pub no_relevant_retrieved: Vec<String>,
    pub aggregates: BTreeMap<String, f64>,
    pub per_bug: Vec<BugResult>,
}

impl MetricsReport {
    pub fn metric(&self, name: &str) -> f64 {
        self.aggregates.get(name).copied().unwrap_or(0.0)
    }
}

/// MAP and Top-k over every evaluated bug; MRR over bugs with a retrieved buggy file.
pub fn aggregate(
    project: &str,
    composer: &str,
    results: Vec<BugResult>,
    excluded_empty_truth: Vec<String>,
) -> Result<MetricsReport, EvalError> {
    if results.is_empty() {
        return Err(EvalError::NoBugs);
    }
    let n = results.len() as f64;
    let map = results.iter().map(|r| r.average_precision).sum::<f64>() / n;
    let rrs: Vec<f64> = results.iter().filter_map(|r| r.reciprocal_rank).collect();
    let mrr = if rrs.is_empty() { 0.0 } else { rrs.iter().sum::<f64>() / rrs.len() as f64 };
    let top = |k: usize| results.iter().filter(|r| r.first_rank.is_some_and(|f| f <= k)).count() as f64 / n;
    let aggregates = BTreeMap::from([
        ("MAP".to_string(), map),
        ("MRR".to_string(), mrr),
        ("Top1".to_string(), top(1)),
        ("Top5".to_string(), top(5)),
        ("Top10".to_string(), top(10)),
    ]);
    Ok(MetricsReport {
        project: project.to_string(),
        composer: composer.to_string(),
        bug_count: results.len(),
        excluded_empty_truth,
        no_relevant_retrieved: results.iter().filter(|r| r.first_rank.is_none()).map(|r| r.bug_id.clone()).collect(),
        aggregates,
        per_bug: results,
    })
}

/// Evaluates every ranking against its truth set; empty truth sets are excluded and listed.
pub fn evaluate_rankings(
    project: &str,
    composer: &str,
    rankings: &[RankedList],
    truth: &BTreeMap<String, BTreeSet<String>>,
) -> Result<MetricsReport, EvalError> {
    let mut results = Vec::new();
    let mut excluded = Vec::new();
    let empty = BTreeSet::new();
    for ranking in rankings {
        match evaluate_bug(ranking, truth.get(&ranking.bug_id).unwrap_or(&empty)) {
            Ok(r) => results.push(r),
            Err(EvalError::EmptyTruth) => excluded.push(ranking.bug_id.clone()),
            Err(e) => return Err(e),
        }
    }
    aggregate(project, composer, results, excluded)
}

/// `PROJECT,MAP,MRR,Top1,Top5,Top10` with a closing `Average` row.
pub fn write_report_csv<W: Write>(out: W, reports: &[MetricsReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["PROJECT"];
    header.extend(METRICS);
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.project.clone()];
        row.extend(METRICS.iter().map(|m| format!("{:.3}", r.metric(m))));
        w.write_record(&row)?;
    }
    if !reports.is_empty() {
        let mut row = vec!["Average".to_string()];
        row.extend(
            METRICS
                .iter()
                .map(|m| format!("{:.3}", reports.iter().map(|r| r.metric(m)).sum::<f64>() / reports.len() as f64)),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
