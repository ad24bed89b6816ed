//! Per-(bug, file) suspiciousness tables shared by the three scoring components.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// Similar reports over the trace graph.
    Trace,
    /// Decayed bug-fix history.
    History,
    /// Structured code retrieval.
    Structure,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Trace, Component::History, Component::Structure];

    pub fn column(&self) -> &'static str {
        match self {
            Component::Trace => "susp_r",
            Component::History => "susp_h",
            Component::Structure => "susp_s",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Component::Trace => "trace",
            Component::History => "history",
            Component::Structure => "structure",
        }
    }

    pub fn file_name(&self) -> String {
        format!("scores_{}.csv", self.name())
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "trace" | "r" => Some(Component::Trace),
            "history" | "h" => Some(Component::History),
            "structure" | "s" => Some(Component::Structure),
            _ => None,
        }
    }
}

/// Scores of one component for one query bug. Files not listed score 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub bug_id: String,
    pub component: Component,
    pub scores: BTreeMap<String, f64>,
}

impl ScoreTable {
    pub fn new(bug_id: impl Into<String>, component: Component) -> Self {
        Self { bug_id: bug_id.into(), component, scores: BTreeMap::new() }
    }

    pub fn get(&self, path: &str) -> f64 {
        self.scores.get(path).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, path: &str, value: f64) {
        *self.scores.entry(path.to_string()).or_default() += value;
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.scores.iter()
    }
}

/// Writes `bug_id,file_path,<column>` rows for every table, in the given order.
pub fn write_tables<W: Write>(out: W, component: Component, tables: &[ScoreTable]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bug_id", "file_path", component.column()])?;
    for table in tables {
        for (path, score) in table.iter() {
            w.write_record([table.bug_id.as_str(), path.as_str(), &score.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a score CSV back into tables keyed by bug id.
pub fn read_tables<R: Read>(input: R, component: Component) -> csv::Result<BTreeMap<String, ScoreTable>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut tables: BTreeMap<String, ScoreTable> = BTreeMap::new();
    for record in reader.deserialize::<(String, String, f64)>() {
        let (bug, path, score) = record?;
        tables
            .entry(bug.clone())
            .or_insert_with(|| ScoreTable::new(bug, component))
            .scores
            .insert(path, score);
    }
    Ok(tables)
}
