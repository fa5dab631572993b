//! Commit extraction from `git log --numstat` and the JSON Lines extract cache.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

/// Per-file line deltas of one commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    #[serde(rename = "add")]
    pub lines_added: u64,
    #[serde(rename = "del")]
    pub lines_deleted: u64,
    #[serde(rename = "bin")]
    pub is_binary: bool,
}

impl FileChange {
    pub fn text(path: impl Into<String>, added: u64, deleted: u64) -> Self {
        Self {
            path: path.into(),
            lines_added: added,
            lines_deleted: deleted,
            is_binary: false,
        }
    }

    pub fn binary(path: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            lines_added: 0,
            lines_deleted: 0,
            is_binary: true,
        }
    }
}

/// One commit of an extract. Field names on disk are fixed: see [`write_extract`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    #[serde(rename = "id")]
    pub commit_id: String,
    #[serde(rename = "author")]
    pub author_id: String,
    /// Committer time, seconds since the epoch.
    #[serde(rename = "ts")]
    pub timestamp: i64,
    #[serde(rename = "msg")]
    pub message: String,
    #[serde(rename = "merge")]
    pub is_merge: bool,
    #[serde(rename = "files")]
    pub changes: Vec<FileChange>,
}

#[derive(Debug, thiserror::Error)]
pub enum GitError {
    #[error("{0} is not a git repository")]
    NotARepository(PathBuf),
    #[error("failed to run git: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("git {args} failed: {stderr}")]
    Command { args: String, stderr: String },
    #[error("`until` must be a positive timestamp, got {0}")]
    InvalidUntil(i64),
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {source}")]
    Malformed {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// A recoverable problem found while parsing `git log` output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub commit_id: String,
    pub detail: String,
}

const RECORD_SEP: char = '\x1e';
const FIELD_SEP: char = '\x1f';
const LOG_FORMAT: &str = "--format=%x1e%H%x1f%P%x1f%ae%x1f%an%x1f%ct%x1f%B%x1f";

/// Lowercased email, or lowercased name when the email is empty.
pub fn normalize_author(email: &str, name: &str) -> String {
    let email = email.trim();
    if email.is_empty() {
        name.trim().to_lowercase()
    } else {
        email.to_lowercase()
    }
}

fn git(repo: &Path, args: &[&str]) -> Result<std::process::Output, GitError> {
    let out = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "core.quotepath=off", "-c", "log.showSignature=false"])
        .args(args)
        .env("GIT_TERMINAL_PROMPT", "0")
        .output()?;
    Ok(out)
}

/// All non-merge commits on the first-parent chain of `HEAD`, oldest first.
///
/// Commits with a committer time after `until` are dropped. The output is
/// sorted by `(timestamp, commit_id)`. Paths are not followed across renames.
/// Numstat lines that cannot be parsed are logged and skipped.
pub fn extract_history(repo: &Path, until: Option<i64>) -> Result<Vec<CommitRecord>, GitError> {
    if let Some(u) = until {
        if u <= 0 {
            return Err(GitError::InvalidUntil(u));
        }
    }
    let probe = git(repo, &["rev-parse", "--git-dir"])?;
    if !repo.is_dir() || !probe.status.success() {
        return Err(GitError::NotARepository(repo.to_path_buf()));
    }
    let head = git(repo, &["rev-parse", "--verify", "--quiet", "HEAD^{commit}"])?;
    if !head.status.success() {
        // unborn branch: nothing committed yet
        return Ok(Vec::new());
    }

    let args = [
        "log",
        "--first-parent",
        "--no-merges",
        "--numstat",
        "--no-renames",
        "--no-color",
        "-z",
        LOG_FORMAT,
        "HEAD",
    ];
    let out = git(repo, &args)?;
    if !out.status.success() {
        return Err(GitError::Command {
            args: args.join(" "),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let (mut records, warnings) = parse_log(&text);
    for w in &warnings {
        log::warn!("{}: commit {}: {}", repo.display(), w.commit_id, w.detail);
    }
    if let Some(u) = until {
        records.retain(|r| r.timestamp <= u);
    }
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [CommitRecord]) {
    records.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.commit_id.cmp(&b.commit_id))
    });
}

/// Parse the output of `git log -z --numstat` in [`LOG_FORMAT`].
///
/// Merge commits and commits with a non-positive timestamp are dropped; the
/// latter with a warning.
pub fn parse_log(text: &str) -> (Vec<CommitRecord>, Vec<ParseWarning>) {
    let mut records = Vec::new();
    let mut warnings = Vec::new();

    for chunk in text
        .split(RECORD_SEP)
        .filter(|c| !c.trim_matches(['\0', '\n']).is_empty())
    {
        let mut fields = chunk.splitn(6, FIELD_SEP);
        let (Some(id), Some(parents), Some(email), Some(name), Some(ts), Some(rest)) = (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) else {
            warnings.push(ParseWarning {
                commit_id: String::new(),
                detail: "truncated commit header".into(),
            });
            continue;
        };
        // the message is terminated by the last field separator
        let (message, numstat) = match rest.rfind(FIELD_SEP) {
            Some(i) => (&rest[..i], &rest[i + 1..]),
            None => (rest, ""),
        };
        let commit_id = id.trim().to_string();
        let timestamp = match ts.trim().parse::<i64>() {
            Ok(t) if t > 0 => t,
            _ => {
                warnings.push(ParseWarning {
                    commit_id,
                    detail: format!("unusable timestamp {ts:?}; commit skipped"),
                });
                continue;
            }
        };
        let is_merge = parents.split_whitespace().count() > 1;

        let mut changes = Vec::new();
        for entry in numstat.split('\0') {
            let entry = entry.trim_start_matches('\n');
            if entry.is_empty() {
                continue;
            }
            match parse_numstat_entry(entry) {
                Some(c) => changes.push(c),
                None => warnings.push(ParseWarning {
                    commit_id: commit_id.clone(),
                    detail: format!("unparsable numstat entry {entry:?}; change dropped"),
                }),
            }
        }

        if is_merge {
            continue;
        }
        records.push(CommitRecord {
            commit_id,
            author_id: normalize_author(email, name),
            timestamp,
            message: message.trim_end_matches('\n').to_string(),
            is_merge,
            changes,
        });
    }
    (records, warnings)
}

fn parse_numstat_entry(entry: &str) -> Option<FileChange> {
    let mut parts = entry.splitn(3, '\t');
    let added = parts.next()?;
    let deleted = parts.next()?;
    let path = parts.next()?;
    if path.is_empty() {
        return None;
    }
    if added == "-" && deleted == "-" {
        return Some(FileChange::binary(path));
    }
    Some(FileChange::text(
        path,
        added.parse().ok()?,
        deleted.parse().ok()?,
    ))
}

/// Write one JSON object per line:
/// `{"id","author","ts","msg","merge","files":[{"path","add","del","bin"}]}`.
pub fn write_extract(records: &[CommitRecord], path: &Path) -> Result<(), ExtractFileError> {
    let io_err = |source| ExtractFileError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("commit records always serialize");
        w.write_all(line.as_bytes()).map_err(io_err)?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_extract(path: &Path) -> Result<Vec<CommitRecord>, ExtractFileError> {
    let io_err = |source| ExtractFileError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| ExtractFileError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        records.push(rec);
    }
    Ok(records)
}
