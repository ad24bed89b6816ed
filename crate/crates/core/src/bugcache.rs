//! Version-history component: recent bug-fixing commits, decayed by age.
//!
//! Commits inside the `k`-day window before the cut-off that look like fixes
//! (lowercased message matches `(.*fix.*)|(.*bug.*)`, or the message starts with a
//! known bug id) contribute `1 / (1 + e^{12(1 - (k - t_c)/k)})` to every file they
//! touch, where `t_c` is the commit's age in days at the cut-off.
//!
//! The cut-off defaults to the query's creation date. Using the resolution date
//! lets the bug's own fix commits leak into the score, so it is only accepted when
//! leakage is explicitly allowed.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CommitLog, CommitRecord, FileSnapshot, IssueReport, Timestamp, SECONDS_PER_DAY};
use crate::score::{Component, ScoreTable};

pub const FIX_PATTERN: &str = "(.*fix.*)|(.*bug.*)";
pub const DEFAULT_WINDOW_DAYS: f64 = 15.0;

#[derive(Debug, Error, PartialEq)]
pub enum BugCacheError {
    #[error("window length must be positive, got {0}")]
    InvalidWindow(f64),
    #[error("the resolved-date cut-off reads the bug's own fix commits; pass --allow-leakage to use it")]
    LeakageNotAllowed,
    #[error("commit {hash} at {timestamp} is not before query {bug} created at {created}")]
    LeakageDetected { bug: String, hash: String, timestamp: Timestamp, created: Timestamp },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryCutoff {
    #[default]
    Created,
    /// Leaky: the query's resolution date.
    Resolved,
}

impl HistoryCutoff {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "created" | "created_date" => Some(HistoryCutoff::Created),
            "resolved" | "resolved_date" | "fixed" => Some(HistoryCutoff::Resolved),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BugCacheConfig {
    pub window_days: f64,
    pub cutoff: HistoryCutoff,
    pub allow_leakage: bool,
}

impl Default for BugCacheConfig {
    fn default() -> Self {
        Self { window_days: DEFAULT_WINDOW_DAYS, cutoff: HistoryCutoff::Created, allow_leakage: false }
    }
}

impl BugCacheConfig {
    pub fn validate(&self) -> Result<(), BugCacheError> {
        if !(self.window_days > 0.0 && self.window_days.is_finite()) {
            return Err(BugCacheError::InvalidWindow(self.window_days));
        }
        if self.cutoff == HistoryCutoff::Resolved && !self.allow_leakage {
            return Err(BugCacheError::LeakageNotAllowed);
        }
        Ok(())
    }

    fn window_seconds(&self) -> i64 {
        (self.window_days * SECONDS_PER_DAY as f64).round() as i64
    }

    /// The instant the window ends at; `None` for unresolved queries under the resolved cut-off.
    pub fn cutoff_time(&self, query: &IssueReport) -> Option<Timestamp> {
        match self.cutoff {
            HistoryCutoff::Created => Some(query.created),
            HistoryCutoff::Resolved => query.resolved,
        }
    }
}

fn fix_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(FIX_PATTERN).expect("static regex"))
}

/// The leading id-like token of a message, upper-cased.
fn leading_token(message: &str) -> Option<String> {
    let trimmed = message.trim_start_matches(|c: char| !c.is_alphanumeric());
    let token: String = trimmed
        .chars()
        .take_while(|c| c.is_alphanumeric() || *c == '-' || *c == '_')
        .collect();
    (!token.is_empty()).then(|| token.to_uppercase())
}

/// True when a commit message marks a bug fix.
pub fn is_fix_message(message: &str, bug_ids: &HashSet<String>) -> bool {
    fix_regex().is_match(&message.to_lowercase())
        || leading_token(message).is_some_and(|t| bug_ids.contains(&t))
}

/// One commit's contribution at age `age_days` for a `window_days` window.
pub fn decay_term(age_days: f64, window_days: f64) -> f64 {
    1.0 / (1.0 + (12.0 * (1.0 - ((window_days - age_days) / window_days))).exp())
}

/// Fix commits with `cutoff - k days <= timestamp < cutoff`.
pub fn find_fix_commits<'a>(
    log: &'a CommitLog,
    bug_ids: &HashSet<String>,
    query: &IssueReport,
    cfg: &BugCacheConfig,
) -> Vec<&'a CommitRecord> {
    let Some(cutoff) = cfg.cutoff_time(query) else {
        return Vec::new();
    };
    log.between(cutoff - cfg.window_seconds(), cutoff)
        .iter()
        .filter(|c| is_fix_message(&c.message, bug_ids))
        .collect()
}

/// Sums the decay term of every selected commit over the files it touched that exist
/// in `snapshot`.
pub fn bugcache_score(
    commits: &[&CommitRecord],
    query: &IssueReport,
    cfg: &BugCacheConfig,
    snapshot: &FileSnapshot,
) -> ScoreTable {
    let mut table = ScoreTable::new(query.id.clone(), Component::History);
    let Some(cutoff) = cfg.cutoff_time(query) else {
        return table;
    };
    for commit in commits {
        let age_days = (cutoff - commit.timestamp) as f64 / SECONDS_PER_DAY as f64;
        let term = decay_term(age_days, cfg.window_days);
        for path in commit.source_paths() {
            if snapshot.contains(path) {
                table.add(path, term);
            }
        }
    }
    table
}

/// Fails if any commit feeding the history score is not strictly older than the query.
pub fn audit_leakage(query: &IssueReport, commits: &[&CommitRecord]) -> Result<(), BugCacheError> {
    match commits.iter().find(|c| c.timestamp >= query.created) {
        Some(c) => Err(BugCacheError::LeakageDetected {
            bug: query.id.clone(),
            hash: c.hash.clone(),
            timestamp: c.timestamp,
            created: query.created,
        }),
        None => Ok(()),
    }
}
