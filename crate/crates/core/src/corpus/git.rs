//! Commit history from a local clone via the `git` executable.

use std::path::Path;
use std::process::Command;

use super::model::{CommitRecord, FileChange};
use super::CorpusError;

const RECORD_SEP: char = '\u{1e}';
const FIELD_SEP: char = '\u{1f}';

/// Replays the first-parent history oldest-first, with rename detection.
pub fn read_history(repo: &Path) -> Result<Vec<CommitRecord>, CorpusError> {
    let unreadable = |reason: String| CorpusError::UnreadableSource {
        path: repo.display().to_string(),
        reason,
    };
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args([
            "-c",
            "core.quotepath=off",
            "log",
            "--first-parent",
            "-m",
            "--root",
            "--reverse",
            "-M",
            "--name-status",
            "--format=%x1e%H%x1f%ct%x1f%B%x1f",
        ])
        .output()
        .map_err(|e| unreadable(format!("cannot run git: {e}")))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        if stderr.contains("does not have any commits") {
            return Err(CorpusError::EmptyHistory);
        }
        return Err(unreadable(stderr.trim().to_string()));
    }
    parse_log(&String::from_utf8_lossy(&output.stdout))
}

fn parse_log(raw: &str) -> Result<Vec<CommitRecord>, CorpusError> {
    let mut commits = Vec::new();
    for record in raw.split(RECORD_SEP).filter(|r| !r.trim().is_empty()) {
        let mut fields = record.splitn(4, FIELD_SEP);
        let (Some(hash), Some(time), Some(message)) = (fields.next(), fields.next(), fields.next()) else {
            continue;
        };
        let timestamp = time.trim().parse::<i64>().map_err(|_| CorpusError::MalformedTimestamp {
            line: commits.len() + 1,
            value: time.to_string(),
        })?;
        let changes = fields
            .next()
            .unwrap_or_default()
            .lines()
            .filter_map(parse_status_line)
            .collect();
        commits.push(CommitRecord {
            hash: hash.trim().to_string(),
            timestamp,
            message: message.trim().to_string(),
            changes,
        });
    }
    Ok(commits)
}

fn parse_status_line(line: &str) -> Option<FileChange> {
    let mut parts = line.split('\t');
    let status = parts.next()?.trim();
    let first = parts.next()?;
    let second = parts.next();
    match status.chars().next()? {
        'A' => Some(FileChange::added(first)),
        'M' | 'T' => Some(FileChange::modified(first)),
        'D' => Some(FileChange::deleted(first)),
        'R' => match second {
            Some(to) if to != first => Some(FileChange::renamed(first, to)),
            Some(to) => Some(FileChange::modified(to)),
            None => None,
        },
        // copies leave the source in place
        'C' => second.map(FileChange::added),
        _ => None,
    }
}
