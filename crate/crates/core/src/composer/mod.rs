//! Fusion of the three component scores into one ranking per query bug.
//!
//! Six unsupervised composers work on one query at a time. Four supervised ones
//! (logistic regression, decision tree, random forest, MLP) are trained on the
//! earliest-resolved bugs and rank the rest by predicted probability of being buggy.

mod fusion;
mod model;
mod split;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fusion::{fixed_coefficients, fuse_borda, fuse_comb, fuse_corrb, fuse_fixed, CombVariant};
pub use model::{train_model, DecisionTree, Forest, Logistic, Mlp, Model, ModelKind, ModelParams};
pub use split::{split_train_test, undersample, DEFAULT_SPLIT_RATIO, MIN_BUGS_FOR_SPLIT};

use crate::corpus::FileSnapshot;
use crate::score::ScoreTable;

#[derive(Debug, Error, PartialEq)]
pub enum ComposerError {
    #[error("snapshot for {bug} has no files")]
    EmptySnapshot { bug: String },
    #[error("need at least {required} resolved bugs with ground truth to split, found {found}")]
    TooFewBugs { found: usize, required: usize },
    #[error("training rows contain a single class")]
    SingleClass,
    #[error("non-finite feature value in row for {bug} / {file}")]
    NonFinite { bug: String, file: String },
    #[error("unknown composer {0:?}")]
    UnknownComposer(String),
    #[error("invalid fusion spec: {0}")]
    InvalidSpec(String),
}

/// One candidate file of one query with its three component scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub bug_id: String,
    pub file_path: String,
    pub susp_r: f64,
    pub susp_h: f64,
    pub susp_s: f64,
    pub label: bool,
}

impl FeatureRow {
    /// Features in `[R, H, S]` order.
    pub fn features(&self) -> [f64; 3] {
        [self.susp_r, self.susp_h, self.susp_s]
    }

    fn set_feature(&mut self, idx: usize, value: f64) {
        match idx {
            0 => self.susp_r = value,
            1 => self.susp_h = value,
            _ => self.susp_s = value,
        }
    }
}

/// The three component tables of one query.
#[derive(Debug, Clone, Copy)]
pub struct ComponentTables<'a> {
    pub trace: &'a ScoreTable,
    pub history: &'a ScoreTable,
    pub structure: &'a ScoreTable,
}

/// One row per snapshot file, in path order. Missing scores are 0.
pub fn assemble_features(
    bug_id: &str,
    tables: ComponentTables<'_>,
    snapshot: &FileSnapshot,
    truth: &BTreeSet<String>,
) -> Result<Vec<FeatureRow>, ComposerError> {
    if snapshot.is_empty() {
        return Err(ComposerError::EmptySnapshot { bug: bug_id.to_string() });
    }
    Ok(snapshot
        .files
        .iter()
        .map(|f| FeatureRow {
            bug_id: bug_id.to_string(),
            file_path: f.clone(),
            susp_r: tables.trace.get(f),
            susp_h: tables.history.get(f),
            susp_s: tables.structure.get(f),
            label: truth.contains(f),
        })
        .collect())
}

/// Min-max scales each component over the rows of one query. Constant columns become 0.
pub fn normalize_per_query(rows: &[FeatureRow]) -> Vec<FeatureRow> {
    let mut out = rows.to_vec();
    for idx in 0..3 {
        let (lo, hi) = rows.iter().map(|r| r.features()[idx]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let span = hi - lo;
        for row in &mut out {
            let v = row.features()[idx];
            row.set_feature(idx, if span > 0.0 { (v - lo) / span } else { 0.0 });
        }
    }
    out
}

/// A query's candidates in final order: descending score, then ascending path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub bug_id: String,
    pub candidates: Vec<(String, f64)>,
}

impl RankedList {
    pub fn from_scores(bug_id: impl Into<String>, mut scores: Vec<(String, f64)>) -> Self {
        for (_, s) in &mut scores {
            // -0.0 and 0.0 must tie
            *s += 0.0;
        }
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self { bug_id: bug_id.into(), candidates: scores }
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|(p, _)| p.as_str())
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// 1-based rank of `path`.
    pub fn rank_of(&self, path: &str) -> Option<usize> {
        self.candidates.iter().position(|(p, _)| p == path).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionKind {
    FixedWeight,
    CombSum,
    CombMnz,
    CombAnz,
    CorrB,
    Borda,
    Lr,
    Dt,
    Rf,
    Mlp,
}

impl FusionKind {
    pub const ALL: [FusionKind; 10] = [
        FusionKind::FixedWeight,
        FusionKind::CombSum,
        FusionKind::CombMnz,
        FusionKind::CombAnz,
        FusionKind::CorrB,
        FusionKind::Borda,
        FusionKind::Lr,
        FusionKind::Dt,
        FusionKind::Rf,
        FusionKind::Mlp,
    ];

    pub fn parse(raw: &str) -> Result<Self, ComposerError> {
        let key = raw.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "fixed_weight" | "fixed" => FusionKind::FixedWeight,
            "combsum" | "comb_sum" => FusionKind::CombSum,
            "combmnz" | "comb_mnz" => FusionKind::CombMnz,
            "combanz" | "comb_anz" => FusionKind::CombAnz,
            "corrb" => FusionKind::CorrB,
            "borda" => FusionKind::Borda,
            "lr" => FusionKind::Lr,
            "dt" => FusionKind::Dt,
            "rf" => FusionKind::Rf,
            "mlp" => FusionKind::Mlp,
            _ => return Err(ComposerError::UnknownComposer(raw.to_string())),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FusionKind::FixedWeight => "fixed_weight",
            FusionKind::CombSum => "combsum",
            FusionKind::CombMnz => "combmnz",
            FusionKind::CombAnz => "combanz",
            FusionKind::CorrB => "corrb",
            FusionKind::Borda => "borda",
            FusionKind::Lr => "lr",
            FusionKind::Dt => "dt",
            FusionKind::Rf => "rf",
            FusionKind::Mlp => "mlp",
        }
    }

    pub fn model_kind(&self) -> Option<ModelKind> {
        match self {
            FusionKind::Lr => Some(ModelKind::Logistic),
            FusionKind::Dt => Some(ModelKind::DecisionTree),
            FusionKind::Rf => Some(ModelKind::RandomForest),
            FusionKind::Mlp => Some(ModelKind::Mlp),
            _ => None,
        }
    }

    pub fn is_supervised(&self) -> bool {
        self.model_kind().is_some()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    MinmaxPerQuery,
    None,
}

impl Normalization {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "minmax_per_query" | "minmax" => Some(Normalization::MinmaxPerQuery),
            "none" => Some(Normalization::None),
            _ => None,
        }
    }
}

/// A composer and its parameters. Recognized parameter keys: `a`, `b` (fixed weight),
/// `top_n` (CorrB) and the model hyperparameters listed in [`ModelParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionSpec {
    pub kind: FusionKind,
    pub params: BTreeMap<String, f64>,
    pub normalization: Normalization,
    pub seed: Option<u64>,
}

impl FusionSpec {
    pub fn new(kind: FusionKind) -> Self {
        Self { kind, params: BTreeMap::new(), normalization: Normalization::default(), seed: None }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<(), ComposerError> {
        if self.kind == FusionKind::FixedWeight {
            for (key, default) in [("a", 0.2), ("b", 0.3)] {
                let v = self.param(key, default);
                if !(0.0..=1.0).contains(&v) {
                    return Err(ComposerError::InvalidSpec(format!("{key} must lie in [0,1], got {v}")));
                }
            }
        }
        if self.kind == FusionKind::CorrB && self.param("top_n", 10.0) < 1.0 {
            return Err(ComposerError::InvalidSpec("top_n must be at least 1".into()));
        }
        if self.kind.is_supervised() && self.seed.is_none() {
            return Err(ComposerError::InvalidSpec(format!("{} needs a seed", self.kind.as_str())));
        }
        Ok(())
    }

    pub fn prepare(&self, rows: &[FeatureRow]) -> Vec<FeatureRow> {
        match self.normalization {
            Normalization::MinmaxPerQuery => normalize_per_query(rows),
            Normalization::None => rows.to_vec(),
        }
    }

    /// Ranks one query's rows with an unsupervised composer; `None` for supervised kinds.
    pub fn fuse(&self, bug_id: &str, rows: &[FeatureRow]) -> Option<RankedList> {
        if self.kind == FusionKind::Borda {
            return Some(fuse_borda(bug_id, rows));
        }
        let rows = self.prepare(rows);
        Some(match self.kind {
            FusionKind::FixedWeight => fuse_fixed(bug_id, &rows, self.param("a", 0.2), self.param("b", 0.3)),
            FusionKind::CombSum => fuse_comb(bug_id, &rows, CombVariant::Sum),
            FusionKind::CombMnz => fuse_comb(bug_id, &rows, CombVariant::Mnz),
            FusionKind::CombAnz => fuse_comb(bug_id, &rows, CombVariant::Anz),
            FusionKind::CorrB => fuse_corrb(bug_id, &rows, self.param("top_n", 10.0) as usize),
            _ => return None,
        })
    }
}

/// Ranks rows by the model's positive-class probability.
pub fn predict_rank(model: &Model, bug_id: &str, rows: &[FeatureRow]) -> RankedList {
    RankedList::from_scores(
        bug_id,
        rows.iter().map(|r| (r.file_path.clone(), model.predict_proba(&r.features()))).collect(),
    )
}

pub fn write_features<W: Write>(out: W, rows: &[FeatureRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bug_id", "file_path", "susp_r", "susp_h", "susp_s", "label"])?;
    for r in rows {
        w.write_record([
            r.bug_id.as_str(),
            r.file_path.as_str(),
            &r.susp_r.to_string(),
            &r.susp_h.to_string(),
            &r.susp_s.to_string(),
            if r.label { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(input: R) -> csv::Result<Vec<FeatureRow>> {
    let mut reader = csv::Reader::from_reader(input);
    reader
        .deserialize::<(String, String, f64, f64, f64, u8)>()
        .map(|r| {
            r.map(|(bug_id, file_path, susp_r, susp_h, susp_s, label)| FeatureRow {
                bug_id,
                file_path,
                susp_r,
                susp_h,
                susp_s,
                label: label != 0,
            })
        })
        .collect()
}

/// Groups rows by bug id, keeping row order within each bug.
pub fn group_by_bug(rows: &[FeatureRow]) -> BTreeMap<String, Vec<FeatureRow>> {
    let mut out: BTreeMap<String, Vec<FeatureRow>> = BTreeMap::new();
    for r in rows {
        out.entry(r.bug_id.clone()).or_default().push(r.clone());
    }
    out
}

pub fn write_rankings<W: Write>(out: W, lists: &[RankedList]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bug_id", "rank", "file_path", "score"])?;
    for list in lists {
        for (i, (path, score)) in list.candidates.iter().enumerate() {
            w.write_record([list.bug_id.as_str(), &(i + 1).to_string(), path.as_str(), &score.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_rankings<R: Read>(input: R) -> csv::Result<Vec<RankedList>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut lists: Vec<RankedList> = Vec::new();
    for record in reader.deserialize::<(String, usize, String, f64)>() {
        let (bug, _, path, score) = record?;
        match lists.last_mut() {
            Some(l) if l.bug_id == bug => l.candidates.push((path, score)),
            _ => lists.push(RankedList { bug_id: bug, candidates: vec![(path, score)] }),
        }
    }
    Ok(lists)
}
