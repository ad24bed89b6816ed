//! Statistical comparison of two sets of per-project reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, PipelineError, ReportBundle};
use crate::eval::{ks_test, paired_ttest, EvalError, KsMethod, MetricsReport, METRICS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareTest {
    TTest,
    Ks,
}

impl CompareTest {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "ttest" | "t" | "paired_ttest" => Some(CompareTest::TTest),
            "ks" | "k-s" => Some(CompareTest::Ks),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CompareTest::TTest => "ttest",
            CompareTest::Ks => "ks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub test: CompareTest,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub projects: usize,
    pub status: String,
}

/// Reads `report.json` bundles and picks one composer's report from each.
pub fn load_reports(paths: &[impl AsRef<Path>], composer: Option<&str>) -> Result<Vec<MetricsReport>, PipelineError> {
    let mut out = Vec::new();
    for p in paths {
        let bundle: ReportBundle = read_json(p.as_ref())?;
        let report = bundle.for_composer(composer).cloned().ok_or_else(|| {
            PipelineError::Data(format!("{} has no report for {:?}", p.as_ref().display(), composer.unwrap_or("any")))
        })?;
        out.push(report);
    }
    Ok(out)
}

/// Per-metric test over the projects both sides report on.
pub fn compare_runs(
    a: &[MetricsReport],
    b: &[MetricsReport],
    test: CompareTest,
) -> Result<Vec<ComparisonRow>, PipelineError> {
    let left: BTreeMap<&str, &MetricsReport> = a.iter().map(|r| (r.project.as_str(), r)).collect();
    let right: BTreeMap<&str, &MetricsReport> = b.iter().map(|r| (r.project.as_str(), r)).collect();
    let common: Vec<&str> = left.keys().filter(|p| right.contains_key(*p)).copied().collect();
    if common.len() < 3 {
        return Err(PipelineError::InsufficientOverlap(common.len()));
    }
    let mut rows = Vec::new();
    for metric in METRICS {
        let xs: Vec<f64> = common.iter().map(|p| left[p].metric(metric)).collect();
        let ys: Vec<f64> = common.iter().map(|p| right[p].metric(metric)).collect();
        let (statistic, p_value, status) = match test {
            CompareTest::TTest => match paired_ttest(&xs, &ys) {
                Ok(r) => (Some(r.t), Some(r.p), "ok".to_string()),
                Err(EvalError::ZeroVariance) => (None, None, "zero_variance".to_string()),
                Err(e) => return Err(PipelineError::Data(e.to_string())),
            },
            CompareTest::Ks => {
                let r = ks_test(&xs, &ys, KsMethod::Auto).map_err(|e| PipelineError::Data(e.to_string()))?;
                (Some(r.d), Some(r.p), if r.exact { "exact" } else { "asymptotic" }.to_string())
            }
        };
        rows.push(ComparisonRow { metric: metric.to_string(), test, statistic, p_value, projects: common.len(), status });
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "test", "statistic", "p_value", "projects", "status"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.metric.as_str(),
            r.test.as_str(),
            &opt(r.statistic),
            &opt(r.p_value),
            &r.projects.to_string(),
            r.status.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(project: &str, map: f64) -> MetricsReport {
        MetricsReport {
            project: project.into(),
            composer: "fixed_weight".into(),
            bug_count: 1,
            excluded_empty_truth: vec![],
            no_relevant_retrieved: vec![],
            aggregates: METRICS.iter().map(|m| (m.to_string(), if *m == "MAP" { map } else { 0.5 })).collect(),
            per_bug: vec![],
        }
    }

    #[test]
    fn self_comparison() {
        let runs = vec![report("a", 0.1), report("b", 0.2), report("c", 0.4)];
        let t = compare_runs(&runs, &runs, CompareTest::TTest).unwrap();
        assert!(t.iter().all(|r| r.status == "zero_variance" && r.statistic.is_none()));
        let ks = compare_runs(&runs, &runs, CompareTest::Ks).unwrap();
        assert!(ks.iter().all(|r| r.statistic == Some(0.0) && r.p_value == Some(1.0)));
    }

    #[test]
    fn needs_three_common_projects() {
        let a = vec![report("a", 0.1), report("b", 0.2), report("c", 0.3)];
        let b = vec![report("a", 0.1), report("b", 0.2), report("z", 0.3)];
        assert!(matches!(compare_runs(&a, &b, CompareTest::TTest), Err(PipelineError::InsufficientOverlap(2))));
    }
}
