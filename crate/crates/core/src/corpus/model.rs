use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// UTC seconds since the Unix epoch.
pub type Timestamp = i64;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueKind {
    Bug,
    /// Any non-bug issue: feature request, improvement, task.
    Feature,
}

impl IssueKind {
    /// Trackers use many non-bug types; everything that is not a bug is a feature here.
    pub fn parse(raw: &str) -> Self {
        if raw.trim().eq_ignore_ascii_case("bug") {
            IssueKind::Bug
        } else {
            IssueKind::Feature
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueReport {
    pub id: String,
    pub kind: IssueKind,
    pub summary: String,
    pub description: String,
    pub created: Timestamp,
    pub resolved: Option<Timestamp>,
    pub linked_issue_ids: BTreeSet<String>,
}

impl IssueReport {
    pub fn new(id: impl Into<String>, kind: IssueKind, created: Timestamp) -> Self {
        Self {
            id: id.into(),
            kind,
            summary: String::new(),
            description: String::new(),
            created,
            resolved: None,
            linked_issue_ids: BTreeSet::new(),
        }
    }

    pub fn with_text(mut self, summary: impl Into<String>, description: impl Into<String>) -> Self {
        self.summary = summary.into();
        self.description = description.into();
        self
    }

    pub fn with_resolved(mut self, resolved: Timestamp) -> Self {
        self.resolved = Some(resolved);
        self
    }

    pub fn with_links<I, S>(mut self, links: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.linked_issue_ids = links.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_bug(&self) -> bool {
        self.kind == IssueKind::Bug
    }

    /// Summary and description joined, the document used for issue similarity.
    pub fn text(&self) -> String {
        format!("{} {}", self.summary, self.description)
    }

    /// True when either side declares an explicit trace link to the other.
    pub fn is_linked_to(&self, other: &IssueReport) -> bool {
        self.linked_issue_ids.contains(&other.id) || other.linked_issue_ids.contains(&self.id)
    }
}

/// An issue record dropped at ingestion because its lifecycle dates are inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

/// Validated issues of one project, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct IssueCorpus {
    issues: Vec<IssueReport>,
    by_id: HashMap<String, usize>,
    rejected: Vec<Rejection>,
}

impl IssueCorpus {
    /// Builds a corpus; issues resolved before they were created are set aside as rejections.
    pub fn from_issues(issues: Vec<IssueReport>) -> Result<Self, CorpusError> {
        let mut corpus = IssueCorpus::default();
        for issue in issues {
            if corpus.by_id.contains_key(&issue.id) {
                return Err(CorpusError::DuplicateId { id: issue.id });
            }
            if let Some(resolved) = issue.resolved {
                if resolved < issue.created {
                    corpus.rejected.push(Rejection {
                        reason: format!(
                            "resolved_date {} precedes created_date {}",
                            resolved, issue.created
                        ),
                        id: issue.id,
                    });
                    continue;
                }
            }
            corpus.by_id.insert(issue.id.clone(), corpus.issues.len());
            corpus.issues.push(issue);
        }
        Ok(corpus)
    }

    pub fn get(&self, id: &str) -> Option<&IssueReport> {
        self.by_id.get(id).map(|&i| &self.issues[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &IssueReport> {
        self.issues.iter()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn bugs(&self) -> impl Iterator<Item = &IssueReport> {
        self.issues.iter().filter(|i| i.is_bug())
    }

    pub fn rejected(&self) -> &[Rejection] {
        &self.rejected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Added,
    Modified,
    Deleted,
    Renamed,
}

impl ChangeKind {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "added" | "add" | "a" => Some(ChangeKind::Added),
            "modified" | "modify" | "m" => Some(ChangeKind::Modified),
            "deleted" | "delete" | "removed" | "d" => Some(ChangeKind::Deleted),
            "renamed" | "rename" | "r" => Some(ChangeKind::Renamed),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ChangeKind::Added => "added",
            ChangeKind::Modified => "modified",
            ChangeKind::Deleted => "deleted",
            ChangeKind::Renamed => "renamed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FileChange {
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    pub kind: ChangeKind,
    /// Set by the owning [`CommitLog`] from its extension filter.
    #[serde(default)]
    pub is_source: bool,
}

impl FileChange {
    pub fn added(path: impl Into<String>) -> Self {
        Self { old_path: None, new_path: Some(path.into()), kind: ChangeKind::Added, is_source: false }
    }

    pub fn modified(path: impl Into<String>) -> Self {
        let path = path.into();
        Self {
            old_path: Some(path.clone()),
            new_path: Some(path),
            kind: ChangeKind::Modified,
            is_source: false,
        }
    }

    pub fn deleted(path: impl Into<String>) -> Self {
        Self { old_path: Some(path.into()), new_path: None, kind: ChangeKind::Deleted, is_source: false }
    }

    pub fn renamed(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            old_path: Some(from.into()),
            new_path: Some(to.into()),
            kind: ChangeKind::Renamed,
            is_source: false,
        }
    }

    /// Checks the path/kind shape of the change.
    pub fn validate(&self) -> Result<(), String> {
        let (old, new) = (self.old_path.as_deref(), self.new_path.as_deref());
        match (self.kind, old, new) {
            (ChangeKind::Added, None, Some(_)) => Ok(()),
            (ChangeKind::Deleted, Some(_), None) => Ok(()),
            (ChangeKind::Renamed, Some(a), Some(b)) if a != b => Ok(()),
            (ChangeKind::Modified, Some(a), Some(b)) if a == b => Ok(()),
            (kind, old, new) => Err(format!(
                "{} change with old={:?} new={:?}",
                kind.as_str(),
                old,
                new
            )),
        }
    }

    /// The path a change is attributed to: the new name, or the old one for deletions.
    pub fn path(&self) -> &str {
        self.new_path
            .as_deref()
            .or(self.old_path.as_deref())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub hash: String,
    pub timestamp: Timestamp,
    pub message: String,
    pub changes: Vec<FileChange>,
}

impl CommitRecord {
    pub fn new(hash: impl Into<String>, timestamp: Timestamp, message: impl Into<String>) -> Self {
        Self { hash: hash.into(), timestamp, message: message.into(), changes: Vec::new() }
    }

    pub fn with_changes(mut self, changes: Vec<FileChange>) -> Self {
        self.changes = changes;
        self
    }

    pub fn source_changes(&self) -> impl Iterator<Item = &FileChange> {
        self.changes.iter().filter(|c| c.is_source)
    }

    /// Distinct source paths this commit touches (new names; old names for deletions).
    pub fn source_paths(&self) -> BTreeSet<&str> {
        self.source_changes().map(FileChange::path).collect()
    }
}

/// Extension-based filter deciding which paths count as source files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFilter {
    extensions: Vec<String>,
}

impl Default for SourceFilter {
    fn default() -> Self {
        Self::new([".java", ".py"])
    }
}

impl SourceFilter {
    pub fn new<I, S>(extensions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let extensions = extensions
            .into_iter()
            .map(|e| {
                let e = e.as_ref().trim().to_ascii_lowercase();
                if e.starts_with('.') { e } else { format!(".{e}") }
            })
            .filter(|e| e.len() > 1)
            .collect();
        Self { extensions }
    }

    pub fn extensions(&self) -> &[String] {
        &self.extensions
    }

    pub fn is_source(&self, path: &str) -> bool {
        let lower = path.to_ascii_lowercase();
        self.extensions.iter().any(|e| lower.ends_with(e.as_str()))
    }

    pub fn matches_change(&self, change: &FileChange) -> bool {
        change.old_path.as_deref().is_some_and(|p| self.is_source(p))
            || change.new_path.as_deref().is_some_and(|p| self.is_source(p))
    }
}

/// Commits of one project in chronological order.
#[derive(Debug, Clone)]
pub struct CommitLog {
    commits: Vec<CommitRecord>,
    by_hash: HashMap<String, usize>,
    filter: SourceFilter,
}

impl CommitLog {
    /// Sorts commits by timestamp (stable, so same-second commits keep input order)
    /// and flags every change against `filter`.
    pub fn new(mut commits: Vec<CommitRecord>, filter: SourceFilter) -> Result<Self, CorpusError> {
        if commits.is_empty() {
            return Err(CorpusError::EmptyHistory);
        }
        commits.sort_by_key(|c| c.timestamp);
        let mut by_hash = HashMap::with_capacity(commits.len());
        for (i, commit) in commits.iter_mut().enumerate() {
            if by_hash.insert(commit.hash.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId { id: commit.hash.clone() });
            }
            for change in &mut commit.changes {
                change
                    .validate()
                    .map_err(|reason| CorpusError::InvalidChange { hash: commit.hash.clone(), reason })?;
                change.is_source = filter.matches_change(change);
            }
        }
        Ok(Self { commits, by_hash, filter })
    }

    pub fn get(&self, hash: &str) -> Option<&CommitRecord> {
        self.by_hash.get(hash).map(|&i| &self.commits[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &CommitRecord> {
        self.commits.iter()
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    pub fn filter(&self) -> &SourceFilter {
        &self.filter
    }

    /// Commits with `from <= timestamp < until`, in chronological order.
    pub fn between(&self, from: Timestamp, until: Timestamp) -> &[CommitRecord] {
        let start = self.commits.partition_point(|c| c.timestamp < from);
        let end = self.commits.partition_point(|c| c.timestamp < until);
        &self.commits[start..end.max(start)]
    }
}

/// Bidirectional issue ↔ commit link map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceIndex {
    issue_to_commits: BTreeMap<String, BTreeSet<String>>,
    commit_to_issues: BTreeMap<String, BTreeSet<String>>,
}

impl TraceIndex {
    pub fn insert(&mut self, issue: &str, commit: &str) {
        self.issue_to_commits
            .entry(issue.to_string())
            .or_default()
            .insert(commit.to_string());
        self.commit_to_issues
            .entry(commit.to_string())
            .or_default()
            .insert(issue.to_string());
    }

    pub fn commits_for(&self, issue: &str) -> Option<&BTreeSet<String>> {
        self.issue_to_commits.get(issue)
    }

    pub fn issues_for(&self, commit: &str) -> Option<&BTreeSet<String>> {
        self.commit_to_issues.get(commit)
    }

    pub fn has_commits(&self, issue: &str) -> bool {
        self.issue_to_commits.get(issue).is_some_and(|c| !c.is_empty())
    }

    pub fn issue_to_commits(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.issue_to_commits
    }

    pub fn commit_to_issues(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.commit_to_issues
    }

    pub fn link_count(&self) -> usize {
        self.issue_to_commits.values().map(BTreeSet::len).sum()
    }
}

/// Source files present at an instant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileSnapshot {
    pub as_of: Timestamp,
    pub files: BTreeSet<String>,
}

impl FileSnapshot {
    pub fn contains(&self, path: &str) -> bool {
        self.files.contains(path)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}
