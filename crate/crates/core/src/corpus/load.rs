//! Readers for the issue, commit and link exports.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde_json::Value;

use super::git;
use super::model::{
    ChangeKind, CommitLog, CommitRecord, FileChange, IssueCorpus, IssueKind, IssueReport,
    SourceFilter, Timestamp,
};
use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueFormat {
    Jsonl,
    Csv,
}

impl IssueFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => IssueFormat::Csv,
            _ => IssueFormat::Jsonl,
        }
    }
}

/// Parses ISO-8601 / RFC 3339 timestamps (offsets honoured, naive values read as UTC),
/// bare dates, and integer epoch seconds.
pub fn parse_timestamp(raw: &str) -> Option<Timestamp> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f%z", "%Y-%m-%dT%H:%M:%S%.f%z", "%Y-%m-%d %H:%M:%S%.f %z"] {
        if let Ok(dt) = DateTime::parse_from_str(raw, fmt) {
            return Some(dt.timestamp());
        }
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

/// Formats a timestamp as RFC 3339 UTC with second precision.
pub fn format_timestamp(ts: Timestamp) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|dt| dt.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| ts.to_string())
}

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|e| CorpusError::UnreadableSource {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn load_issues(path: &Path, format: IssueFormat) -> Result<IssueCorpus, CorpusError> {
    let issues = match format {
        IssueFormat::Jsonl => read_issues_jsonl(path)?,
        IssueFormat::Csv => read_issues_csv(path)?,
    };
    IssueCorpus::from_issues(issues)
}

fn json_str<'a>(obj: &'a Value, key: &str) -> Option<&'a str> {
    obj.get(key).and_then(Value::as_str)
}

fn json_time(obj: &Value, key: &str, line: usize) -> Result<Option<Timestamp>, CorpusError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => n
            .as_i64()
            .map(Some)
            .ok_or_else(|| CorpusError::MalformedTimestamp { line, value: n.to_string() }),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => parse_timestamp(s)
            .map(Some)
            .ok_or_else(|| CorpusError::MalformedTimestamp { line, value: s.clone() }),
        Some(other) => Err(CorpusError::MalformedTimestamp { line, value: other.to_string() }),
    }
}

fn read_issues_jsonl(path: &Path) -> Result<Vec<IssueReport>, CorpusError> {
    let reader = BufReader::new(open(path)?);
    let mut issues = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::UnreadableSource {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
        let missing = |field: &str| CorpusError::MissingField { line: line_no, field: field.to_string() };
        let id = match obj.get("id") {
            Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(missing("id")),
        };
        let kind = json_str(&obj, "kind").ok_or_else(|| missing("kind"))?;
        let summary = json_str(&obj, "summary").ok_or_else(|| missing("summary"))?;
        let created = json_time(&obj, "created_date", line_no)?.ok_or_else(|| missing("created_date"))?;
        let resolved = json_time(&obj, "resolved_date", line_no)?;
        let links: BTreeSet<String> = obj
            .get("links")
            .and_then(Value::as_array)
            .map(|arr| arr.iter().filter_map(Value::as_str).map(str::to_string).collect())
            .unwrap_or_default();
        issues.push(IssueReport {
            id,
            kind: IssueKind::parse(kind),
            summary: summary.to_string(),
            description: json_str(&obj, "description").unwrap_or_default().to_string(),
            created,
            resolved,
            linked_issue_ids: links,
        });
    }
    Ok(issues)
}

fn read_issues_csv(path: &Path) -> Result<Vec<IssueReport>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (id_c, kind_c, sum_c, created_c) = (col("id"), col("kind"), col("summary"), col("created_date"));
    let (desc_c, res_c, links_c) = (col("description"), col("resolved_date"), col("links"));
    let mut issues = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2;
        let record = record.map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
        let get = |c: Option<usize>| c.and_then(|c| record.get(c)).map(str::trim).filter(|s| !s.is_empty());
        let missing = |field: &str| CorpusError::MissingField { line: line_no, field: field.to_string() };
        let id = get(id_c).ok_or_else(|| missing("id"))?;
        let kind = get(kind_c).ok_or_else(|| missing("kind"))?;
        // an empty summary is still a present summary
        let summary = sum_c.and_then(|c| record.get(c)).ok_or_else(|| missing("summary"))?;
        let created_raw = get(created_c).ok_or_else(|| missing("created_date"))?;
        let created = parse_timestamp(created_raw)
            .ok_or_else(|| CorpusError::MalformedTimestamp { line: line_no, value: created_raw.into() })?;
        let resolved = match get(res_c) {
            Some(raw) => Some(
                parse_timestamp(raw)
                    .ok_or_else(|| CorpusError::MalformedTimestamp { line: line_no, value: raw.into() })?,
            ),
            None => None,
        };
        let links = get(links_c)
            .map(|s| {
                s.split([';', ',', ' '])
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        issues.push(IssueReport {
            id: id.to_string(),
            kind: IssueKind::parse(kind),
            summary: summary.to_string(),
            description: get(desc_c).unwrap_or_default().to_string(),
            created,
            resolved,
            linked_issue_ids: links,
        });
    }
    Ok(issues)
}

/// Loads a commit log from a `commits.jsonl` export or, when `source` is a directory,
/// from the git repository checked out there.
pub fn load_commits(source: &Path, filter: SourceFilter) -> Result<CommitLog, CorpusError> {
    let commits = if source.is_dir() {
        git::read_history(source)?
    } else {
        read_commits_jsonl(source)?
    };
    CommitLog::new(commits, filter)
}

fn read_commits_jsonl(path: &Path) -> Result<Vec<CommitRecord>, CorpusError> {
    let reader = BufReader::new(open(path)?);
    let mut commits = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::UnreadableSource {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
        let missing = |field: &str| CorpusError::MissingField { line: line_no, field: field.to_string() };
        let hash = json_str(&obj, "hash").ok_or_else(|| missing("hash"))?.to_string();
        let timestamp = json_time(&obj, "timestamp", line_no)?.ok_or_else(|| missing("timestamp"))?;
        let message = json_str(&obj, "message").unwrap_or_default().to_string();
        let mut changes = Vec::new();
        for change in obj.get("changes").and_then(Value::as_array).into_iter().flatten() {
            let path_of = |key: &str| json_str(change, key).filter(|p| !p.is_empty()).map(str::to_string);
            let (old_path, new_path) = (path_of("old"), path_of("new"));
            let kind = match json_str(change, "kind") {
                Some(raw) => ChangeKind::parse(raw).ok_or_else(|| CorpusError::InvalidChange {
                    hash: hash.clone(),
                    reason: format!("unknown change kind {raw:?}"),
                })?,
                None => infer_kind(old_path.as_deref(), new_path.as_deref()).ok_or_else(|| missing("kind"))?,
            };
            changes.push(FileChange { old_path, new_path, kind, is_source: false });
        }
        commits.push(CommitRecord { hash, timestamp, message, changes });
    }
    Ok(commits)
}

fn infer_kind(old: Option<&str>, new: Option<&str>) -> Option<ChangeKind> {
    match (old, new) {
        (None, Some(_)) => Some(ChangeKind::Added),
        (Some(_), None) => Some(ChangeKind::Deleted),
        (Some(a), Some(b)) if a == b => Some(ChangeKind::Modified),
        (Some(_), Some(_)) => Some(ChangeKind::Renamed),
        (None, None) => None,
    }
}

/// Reads `issue_id,commit_hash` pairs; a header row is optional.
pub fn load_links(path: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut links = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CorpusError::Parse { line: idx + 1, message: e.to_string() })?;
        let (Some(issue), Some(commit)) = (record.get(0), record.get(1)) else {
            if record.iter().all(str::is_empty) {
                continue;
            }
            return Err(CorpusError::MissingField { line: idx + 1, field: "commit_hash".into() });
        };
        if idx == 0 && issue.eq_ignore_ascii_case("issue_id") {
            continue;
        }
        if issue.is_empty() || commit.is_empty() {
            continue;
        }
        links.push((issue.to_string(), commit.to_string()));
    }
    Ok(links)
}
