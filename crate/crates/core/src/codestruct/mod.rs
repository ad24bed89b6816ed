//! Code-structure component: structured retrieval over source identifiers.
//!
//! Each file is split into four fields (type names, method names, variable names,
//! comments). The bug summary and description are issued as two separate queries
//! against each field with Okapi BM25, and the eight query/field scores are summed.

mod extract;
mod source;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{
    extract_fields, extract_fields_named, fallback_fields, preprocess_identifier, CodeField, CodeFields,
    Language,
};
pub use source::{DirectorySource, GitSource, SourceProvider};

use crate::corpus::{FileSnapshot, IssueReport, Timestamp};
use crate::score::{Component, ScoreTable};
use crate::textprep::{preprocess, TokenList};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("structured index has no files")]
    EmptyIndex,
    #[error("cannot read sources: {0}")]
    Source(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

/// How often the structured index is rebuilt during an evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotGranularity {
    /// One index per query bug, over that bug's snapshot and file contents.
    PerBug,
    /// One index per evaluation window over the union of the window's snapshots.
    #[default]
    PerWindow,
}

impl SnapshotGranularity {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "per_bug" => Some(Self::PerBug),
            "per_window" => Some(Self::PerWindow),
            _ => None,
        }
    }
}

/// Nonnegative BM25 idf: `max(0, ln(1 + (N - df + 0.5) / (df + 0.5)))`.
pub fn bm25_idf(doc_count: usize, doc_freq: usize) -> f64 {
    let (n, df) = (doc_count as f64, doc_freq as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0)
}

#[derive(Debug, Clone, Default)]
struct FieldIndex {
    postings: HashMap<String, Vec<(usize, u32)>>,
    doc_len: Vec<f64>,
    avg_len: f64,
}

impl FieldIndex {
    fn build(docs: &[&TokenList]) -> Self {
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        let mut doc_len = Vec::with_capacity(docs.len());
        for (doc, tokens) in docs.iter().enumerate() {
            let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
            for t in tokens.tokens() {
                *tf.entry(t).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term.to_string()).or_default().push((doc, count));
            }
            doc_len.push(tokens.len() as f64);
        }
        let avg_len = if docs.is_empty() { 0.0 } else { doc_len.iter().sum::<f64>() / docs.len() as f64 };
        Self { postings, doc_len, avg_len }
    }

    /// BM25 of `query` against every document; query terms count with multiplicity.
    fn score(&self, query: &TokenList, params: Bm25Params, out: &mut [f64]) {
        if self.avg_len == 0.0 {
            return;
        }
        let n = self.doc_len.len();
        for term in query.tokens() {
            let Some(list) = self.postings.get(term) else { continue };
            let idf = bm25_idf(n, list.len());
            if idf == 0.0 {
                continue;
            }
            for &(doc, tf) in list {
                let tf = tf as f64;
                let norm = params.k1 * (1.0 - params.b + params.b * self.doc_len[doc] / self.avg_len);
                out[doc] += idf * tf * (params.k1 + 1.0) / (tf + norm);
            }
        }
    }
}

/// Per-field BM25 statistics over one shared set of files.
#[derive(Debug, Clone)]
pub struct StructuredIndex {
    files: Vec<String>,
    fields: [FieldIndex; 4],
    params: Bm25Params,
}

/// Summary and description queries issued separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryPart {
    Summary,
    Description,
}

impl StructuredIndex {
    pub fn build(docs: &BTreeMap<String, CodeFields>, params: Bm25Params) -> Self {
        let files: Vec<String> = docs.keys().cloned().collect();
        let values: Vec<&CodeFields> = docs.values().collect();
        let fields = CodeField::ALL.map(|f| FieldIndex::build(&values.iter().map(|d| d.field(f)).collect::<Vec<_>>()));
        Self { files, fields, params }
    }

    /// Reads, parses and indexes `files` as they were at `as_of`.
    pub fn from_sources(
        files: &BTreeSet<String>,
        provider: &dyn SourceProvider,
        as_of: Timestamp,
        default_language: Language,
        params: Bm25Params,
    ) -> Result<Self, CodeError> {
        let paths: Vec<&str> = files.iter().map(String::as_str).collect();
        let contents = provider.read_many(&paths, as_of)?;
        let docs: BTreeMap<String, CodeFields> = paths
            .par_iter()
            .zip(contents.par_iter())
            .map(|(path, content)| {
                let lang = Language::from_path(path).unwrap_or(default_language);
                let fields = content.as_deref().map(|c| extract_fields(c, lang)).unwrap_or_default();
                (path.to_string(), fields)
            })
            .collect();
        Ok(Self::build(&docs, params))
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// BM25 scores of one query part against one field, indexed like [`Self::files`].
    pub fn pair_scores(&self, query: &TokenList, field: CodeField) -> Vec<f64> {
        let mut out = vec![0.0; self.files.len()];
        let idx = CodeField::ALL.iter().position(|f| *f == field).expect("field listed");
        self.fields[idx].score(query, self.params, &mut out);
        out
    }
}

pub fn query_parts(query: &IssueReport) -> [(QueryPart, TokenList); 2] {
    [
        (QueryPart::Summary, preprocess(&query.summary)),
        (QueryPart::Description, preprocess(&query.description)),
    ]
}

/// Sum of the eight query-part × field BM25 scores, restricted to files in `snapshot`
/// when one is given. Files scoring 0 are omitted.
pub fn structure_score(
    query: &IssueReport,
    index: &StructuredIndex,
    snapshot: Option<&FileSnapshot>,
) -> Result<ScoreTable, CodeError> {
    if index.is_empty() {
        return Err(CodeError::EmptyIndex);
    }
    let mut totals = vec![0.0; index.len()];
    for (_, tokens) in query_parts(query) {
        for field in CodeField::ALL {
            for (t, s) in totals.iter_mut().zip(index.pair_scores(&tokens, field)) {
                *t += s;
            }
        }
    }
    let mut table = ScoreTable::new(query.id.clone(), Component::Structure);
    for (file, score) in index.files().iter().zip(totals) {
        if score > 0.0 && snapshot.is_none_or(|s| s.contains(file)) {
            table.scores.insert(file.clone(), score);
        }
    }
    Ok(table)
}
