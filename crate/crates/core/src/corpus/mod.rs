//! Issues, commits and the links between them.
//!
//! Everything downstream works off three immutable values built here: an
//! [`IssueCorpus`], a chronologically sorted [`CommitLog`] and a [`TraceIndex`].
//! File existence at any instant is reconstructed by replaying the log
//! ([`snapshot_files`], [`SnapshotTimeline`]).

mod git;
mod load;
mod model;

use std::collections::{BTreeSet, HashSet};

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

pub use load::{format_timestamp, load_commits, load_issues, load_links, parse_timestamp, IssueFormat};
pub use model::{
    ChangeKind, CommitLog, CommitRecord, FileChange, FileSnapshot, IssueCorpus, IssueKind,
    IssueReport, Rejection, SourceFilter, Timestamp, TraceIndex, SECONDS_PER_DAY,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: malformed timestamp {value:?}")]
    MalformedTimestamp { line: usize, value: String },
    #[error("duplicate id {id:?}")]
    DuplicateId { id: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read {path}: {reason}")]
    UnreadableSource { path: String, reason: String },
    #[error("commit history is empty")]
    EmptyHistory,
    #[error("commit {hash}: invalid file change ({reason})")]
    InvalidChange { hash: String, reason: String },
    #[error("issue {id} has no linked commits")]
    NoLinkedCommits { id: String },
}

/// Which changed files of the fixing commits count as ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthPolicy {
    #[default]
    AllChanged,
    /// Newly added files cannot be predicted from the pre-fix code base.
    ExcludeAdded,
}

fn issue_key_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"[A-Za-z][A-Za-z0-9_]*-[0-9]+").expect("static regex"))
}

/// Ids mentioned in `message` as whole tokens, upper-cased.
///
/// A mention must not be glued to further letters or digits, so `HBASE-1234`
/// does not mention `HBASE-123`.
pub fn mentioned_ids(message: &str) -> BTreeSet<String> {
    let mut ids = BTreeSet::new();
    for token in message.split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '_')) {
        if token.is_empty() {
            continue;
        }
        ids.insert(token.to_uppercase());
        for m in issue_key_pattern().find_iter(token) {
            let before = token[..m.start()].chars().next_back();
            let after = token[m.end()..].chars().next();
            if before.is_some_and(char::is_alphanumeric) || after.is_some_and(char::is_alphanumeric) {
                continue;
            }
            ids.insert(m.as_str().to_uppercase());
        }
    }
    ids
}

/// Links commits to issues by explicit side-file records and by whole-token id mentions.
pub fn link_issues_commits(
    corpus: &IssueCorpus,
    log: &CommitLog,
    explicit: &[(String, String)],
) -> TraceIndex {
    let mut index = TraceIndex::default();
    for (issue, commit) in explicit {
        if corpus.contains(issue) && log.get(commit).is_some() {
            index.insert(issue, commit);
        }
    }
    let by_upper: std::collections::HashMap<String, &str> =
        corpus.iter().map(|i| (i.id.to_uppercase(), i.id.as_str())).collect();
    for commit in log.iter() {
        for mention in mentioned_ids(&commit.message) {
            if let Some(id) = by_upper.get(&mention) {
                index.insert(id, &commit.hash);
            }
        }
    }
    index
}

fn apply_change(files: &mut BTreeSet<String>, change: &FileChange, filter: &SourceFilter) {
    if let Some(old) = change.old_path.as_deref() {
        if matches!(change.kind, ChangeKind::Deleted | ChangeKind::Renamed) {
            files.remove(old);
        }
    }
    if change.kind != ChangeKind::Deleted {
        if let Some(new) = change.new_path.as_deref() {
            if filter.is_source(new) {
                files.insert(new.to_string());
            }
        }
    }
}

/// Applies one commit's changes to a set of existing source files.
pub fn apply_commit(files: &mut BTreeSet<String>, commit: &CommitRecord, filter: &SourceFilter) {
    for change in &commit.changes {
        apply_change(files, change, filter);
    }
}

/// Source files that exist just before `as_of`: all changes with timestamp < `as_of` replayed.
pub fn snapshot_files(log: &CommitLog, as_of: Timestamp) -> FileSnapshot {
    let mut files = BTreeSet::new();
    for commit in log.iter().take_while(|c| c.timestamp < as_of) {
        apply_commit(&mut files, commit, log.filter());
    }
    FileSnapshot { as_of, files }
}

/// Incremental replayer for many snapshot instants over the same log.
pub struct SnapshotTimeline<'a> {
    log: &'a CommitLog,
}

impl<'a> SnapshotTimeline<'a> {
    pub fn new(log: &'a CommitLog) -> Self {
        Self { log }
    }

    /// One snapshot per requested instant, returned in request order.
    pub fn snapshots_at(&self, instants: &[Timestamp]) -> Vec<FileSnapshot> {
        let mut order: Vec<usize> = (0..instants.len()).collect();
        order.sort_by_key(|&i| instants[i]);
        let mut out: Vec<Option<FileSnapshot>> = vec![None; instants.len()];
        let mut files = BTreeSet::new();
        let mut commits = self.log.iter().peekable();
        for i in order {
            let as_of = instants[i];
            while let Some(commit) = commits.next_if(|c| c.timestamp < as_of) {
                apply_commit(&mut files, commit, self.log.filter());
            }
            out[i] = Some(FileSnapshot { as_of, files: files.clone() });
        }
        out.into_iter().map(|s| s.expect("every slot filled")).collect()
    }
}

/// Source files changed by the commits linked to `issue`.
///
/// Renames contribute the new name and deletions the old one. Under
/// [`TruthPolicy::ExcludeAdded`], newly added files are left out.
pub fn ground_truth(
    issue: &IssueReport,
    index: &TraceIndex,
    log: &CommitLog,
    policy: TruthPolicy,
) -> Result<BTreeSet<String>, CorpusError> {
    let commits = index
        .commits_for(&issue.id)
        .filter(|c| !c.is_empty())
        .ok_or_else(|| CorpusError::NoLinkedCommits { id: issue.id.clone() })?;
    let mut truth = BTreeSet::new();
    for commit in commits.iter().filter_map(|h| log.get(h)) {
        for change in commit.source_changes() {
            if policy == TruthPolicy::ExcludeAdded && change.kind == ChangeKind::Added {
                continue;
            }
            truth.insert(change.path().to_string());
        }
    }
    Ok(truth)
}

/// Distinct source files changed by the issue's commits, before any snapshot filtering.
pub fn changed_source_files(issue_id: &str, index: &TraceIndex, log: &CommitLog) -> BTreeSet<String> {
    let mut files = BTreeSet::new();
    for commit in index.commits_for(issue_id).into_iter().flatten().filter_map(|h| log.get(h)) {
        files.extend(commit.source_changes().map(|c| c.path().to_string()));
    }
    files
}

/// Ids of bug reports, upper-cased, for "message starts with a bug id" checks.
pub fn bug_id_set(corpus: &IssueCorpus) -> HashSet<String> {
    corpus.bugs().map(|b| b.id.to_uppercase()).collect()
}
