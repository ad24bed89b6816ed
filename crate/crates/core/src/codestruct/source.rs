//! Where file contents come from: a plain checkout or a git object store.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use super::CodeError;
use crate::corpus::Timestamp;

/// Supplies file contents as of an instant. Missing files yield `None`.
pub trait SourceProvider: Sync {
    fn read_many(&self, paths: &[&str], as_of: Timestamp) -> Result<Vec<Option<String>>, CodeError>;
}

/// A directory holding one checkout. The instant is ignored, so the snapshot
/// filter alone decides which files take part.
#[derive(Debug, Clone)]
pub struct DirectorySource {
    root: PathBuf,
}

impl DirectorySource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl SourceProvider for DirectorySource {
    fn read_many(&self, paths: &[&str], _as_of: Timestamp) -> Result<Vec<Option<String>>, CodeError> {
        Ok(paths
            .iter()
            .map(|p| std::fs::read(self.root.join(p)).ok().map(|b| String::from_utf8_lossy(&b).into_owned()))
            .collect())
    }
}

/// A git repository; files are read at the last first-parent commit before the instant.
#[derive(Debug, Clone)]
pub struct GitSource {
    repo: PathBuf,
}

impl GitSource {
    pub fn new(repo: impl Into<PathBuf>) -> Self {
        Self { repo: repo.into() }
    }

    pub fn repo(&self) -> &Path {
        &self.repo
    }

    /// Hash of the newest first-parent commit strictly before `as_of`.
    pub fn revision_before(&self, as_of: Timestamp) -> Result<Option<String>, CodeError> {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.repo)
            .args(["rev-list", "-1", "--first-parent"])
            .arg(format!("--before=@{}", as_of - 1))
            .arg("HEAD")
            .output()
            .map_err(|e| CodeError::Source(e.to_string()))?;
        if !out.status.success() {
            return Err(CodeError::Source(String::from_utf8_lossy(&out.stderr).trim().to_string()));
        }
        let rev = String::from_utf8_lossy(&out.stdout).trim().to_string();
        Ok((!rev.is_empty()).then_some(rev))
    }
}

impl SourceProvider for GitSource {
    fn read_many(&self, paths: &[&str], as_of: Timestamp) -> Result<Vec<Option<String>>, CodeError> {
        let Some(rev) = self.revision_before(as_of)? else {
            return Ok(vec![None; paths.len()]);
        };
        let mut child = Command::new("git")
            .arg("-C")
            .arg(&self.repo)
            .args(["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| CodeError::Source(e.to_string()))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let requests: Vec<String> = paths.iter().map(|p| format!("{rev}:{p}\n")).collect();
        let writer = std::thread::spawn(move || -> std::io::Result<()> {
            for r in requests {
                stdin.write_all(r.as_bytes())?;
            }
            Ok(())
        });
        let mut reader = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut results = Vec::with_capacity(paths.len());
        let io = |e: std::io::Error| CodeError::Source(e.to_string());
        for _ in paths {
            let mut header = String::new();
            reader.read_line(&mut header).map_err(io)?;
            let fields: Vec<&str> = header.split_whitespace().collect();
            match fields.as_slice() {
                [_, kind, size] => {
                    let size: usize = size.parse().map_err(|_| CodeError::Source(format!("bad header {header:?}")))?;
                    let mut body = vec![0; size + 1];
                    reader.read_exact(&mut body).map_err(io)?;
                    body.pop();
                    results.push((*kind == "blob").then(|| String::from_utf8_lossy(&body).into_owned()));
                }
                _ => results.push(None),
            }
        }
        writer.join().expect("writer thread").map_err(io)?;
        child.wait().map_err(io)?;
        Ok(results)
    }
}
