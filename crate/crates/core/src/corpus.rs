//! Study corpus: the project manifest, repository acquisition and the
//! extract cache.
//!
//! Cache layout: `<cache>/owner__name/` holds a bare clone and
//! `<cache>/owner__name.jsonl` its extract.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{DateTime, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gitlog::{self, CommitRecord};

/// The bundled 46-project manifest.
pub const DEFAULT_MANIFEST: &str = include_str!("../manifest/projects.toml");

/// Default pin: end of 2019-06-30, UTC.
pub const DEFAULT_PIN: &str = "2019-06-30";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectEntry {
    pub slug: String,
    pub clone_url: String,
    pub pin_until: Option<i64>,
    pub expected_commits: Option<u64>,
    pub languages: Vec<String>,
}

impl ProjectEntry {
    /// `owner__name`, the cache key of this project.
    pub fn cache_key(&self) -> String {
        cache_key(&self.slug)
    }
}

pub fn cache_key(slug: &str) -> String {
    slug.replace('/', "__")
}

/// Inverse of [`cache_key`].
pub fn slug_from_key(key: &str) -> String {
    key.replacen("__", "/", 1)
}

pub fn extract_path(cache_dir: &Path, slug: &str) -> PathBuf {
    cache_dir.join(format!("{}.jsonl", cache_key(slug)))
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid TOML: {0}")]
    Syntax(String),
    #[error("manifest entry {index}: {detail}")]
    Entry { index: usize, detail: String },
    #[error("manifest entry {index}: duplicate slug `{slug}`")]
    DuplicateSlug { index: usize, slug: String },
}

#[derive(Debug, thiserror::Error)]
#[error("invalid date `{0}`: expected YYYY-MM-DD, RFC 3339 or epoch seconds")]
pub struct DateError(pub String);

/// Parse a pin date. A bare date means the end of that day, UTC.
pub fn parse_until(s: &str) -> Result<i64, DateError> {
    let s = s.trim();
    if let Ok(secs) = s.parse::<i64>() {
        return if secs > 0 {
            Ok(secs)
        } else {
            Err(DateError(s.into()))
        };
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        let end = d.and_hms_opt(23, 59, 59).expect("valid time").and_utc();
        return Ok(end.timestamp());
    }
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.timestamp())
        .map_err(|_| DateError(s.into()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    slug: String,
    url: Option<String>,
    pin_until: Option<toml::Value>,
    expected_commits: Option<i64>,
    #[serde(default)]
    languages: Vec<String>,
}

#[derive(Deserialize)]
struct RawManifest {
    #[serde(default)]
    project: Vec<toml::Value>,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ProjectEntry>, ManifestError> {
    let raw: RawManifest =
        toml::from_str(text).map_err(|e| ManifestError::Syntax(e.to_string()))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(raw.project.len());
    for (index, value) in raw.project.into_iter().enumerate() {
        let bad = |detail: String| ManifestError::Entry { index, detail };
        let e: RawEntry = value
            .try_into()
            .map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        let slug = e.slug.trim().to_string();
        let parts: Vec<&str> = slug.split('/').collect();
        if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
            return Err(bad(format!("slug `{slug}` is not owner/name")));
        }
        if !seen.insert(slug.to_lowercase()) {
            return Err(ManifestError::DuplicateSlug { index, slug });
        }
        let pin_until = match e.pin_until {
            None => None,
            Some(toml::Value::String(s)) => {
                Some(parse_until(&s).map_err(|err| bad(err.to_string()))?)
            }
            Some(toml::Value::Integer(i)) if i > 0 => Some(i),
            Some(toml::Value::Datetime(dt)) => {
                Some(parse_until(&dt.to_string()).map_err(|err| bad(err.to_string()))?)
            }
            Some(other) => return Err(bad(format!("unusable pin_until {other}"))),
        };
        let expected_commits = match e.expected_commits {
            None => None,
            Some(c) if c > 0 => Some(c as u64),
            Some(c) => return Err(bad(format!("expected_commits must be positive, got {c}"))),
        };
        let clone_url = e
            .url
            .unwrap_or_else(|| format!("https://github.com/{slug}.git"));
        out.push(ProjectEntry {
            slug,
            clone_url,
            pin_until,
            expected_commits,
            languages: e.languages,
        });
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ProjectEntry>, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text)
}

pub fn default_manifest() -> Vec<ProjectEntry> {
    parse_manifest(DEFAULT_MANIFEST).expect("bundled manifest is valid")
}

#[derive(Debug, thiserror::Error)]
pub enum AcquireError {
    #[error("{slug}: {source}")]
    Io {
        slug: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{slug}: clone of {url} failed: {stderr}")]
    Clone {
        slug: String,
        url: String,
        stderr: String,
    },
}

fn is_git_dir(path: &Path) -> bool {
    path.is_dir()
        && Command::new("git")
            .arg("-C")
            .arg(path)
            .args(["rev-parse", "--git-dir"])
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
}

/// Make a local bare clone of `entry` under `cache_dir`, or reuse the one
/// already there. Never touches the network when the clone exists.
pub fn acquire(entry: &ProjectEntry, cache_dir: &Path) -> Result<PathBuf, AcquireError> {
    let io = |source| AcquireError::Io {
        slug: entry.slug.clone(),
        source,
    };
    let dest = cache_dir.join(entry.cache_key());
    if is_git_dir(&dest) {
        return Ok(dest);
    }
    std::fs::create_dir_all(cache_dir).map_err(io)?;
    let staging = cache_dir.join(format!(
        ".{}.partial-{}",
        entry.cache_key(),
        std::process::id()
    ));
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(io)?;
    }
    let out = Command::new("git")
        .args(["clone", "--bare", "--quiet", &entry.clone_url])
        .arg(&staging)
        .env("GIT_TERMINAL_PROMPT", "0")
        .output()
        .map_err(io)?;
    if !out.status.success() {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(AcquireError::Clone {
            slug: entry.slug.clone(),
            url: entry.clone_url.clone(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    if dest.exists() {
        // a stale non-repository directory, or a concurrent winner
        if is_git_dir(&dest) {
            let _ = std::fs::remove_dir_all(&staging);
            return Ok(dest);
        }
        std::fs::remove_dir_all(&dest).map_err(io)?;
    }
    std::fs::rename(&staging, &dest).map_err(io)?;
    Ok(dest)
}

/// Outcome of acquiring and extracting one project.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOutcome {
    pub slug: String,
    pub result: Result<PathBuf, String>,
}

/// Acquire and extract every entry, at most `jobs` at a time. An explicit
/// `until` overrides each entry's own pin. Failures are per project.
pub fn extract_corpus(
    entries: &[ProjectEntry],
    cache_dir: &Path,
    until: Option<i64>,
    jobs: usize,
) -> Vec<ExtractOutcome> {
    let run = |e: &ProjectEntry| -> Result<PathBuf, String> {
        let repo = acquire(e, cache_dir).map_err(|err| err.to_string())?;
        let records = gitlog::extract_history(&repo, until.or(e.pin_until))
            .map_err(|err| format!("{}: {err}", e.slug))?;
        let out = extract_path(cache_dir, &e.slug);
        gitlog::write_extract(&records, &out).map_err(|err| err.to_string())?;
        Ok(out)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        entries
            .par_iter()
            .map(|e| ExtractOutcome {
                slug: e.slug.clone(),
                result: run(e),
            })
            .collect()
    })
}

/// Commit count of one project against its expected value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectDrift {
    pub slug: String,
    pub commits: usize,
    pub expected: Option<u64>,
    /// `100 * (commits - expected) / expected`.
    pub drift_pct: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusTotals {
    pub projects: usize,
    pub commits: u64,
    pub file_entries: u64,
    pub insertions: u64,
    pub deletions: u64,
    pub unique_authors: u64,
}

impl CorpusTotals {
    pub fn of<'a, I>(extracts: I) -> Self
    where
        I: IntoIterator<Item = &'a [CommitRecord]>,
    {
        let mut t = CorpusTotals::default();
        let mut authors = BTreeSet::new();
        for records in extracts {
            t.projects += 1;
            t.commits += records.len() as u64;
            for r in records {
                authors.insert(r.author_id.as_str());
                t.file_entries += r.changes.len() as u64;
                for c in &r.changes {
                    t.insertions += c.lines_added;
                    t.deletions += c.lines_deleted;
                }
            }
        }
        t.unique_authors = authors.len() as u64;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub projects: Vec<ProjectDrift>,
    pub totals: CorpusTotals,
}

impl CorpusReport {
    pub fn render(&self) -> String {
        let mut s =
            String::from("project                                    commits  expected    drift\n");
        for p in &self.projects {
            let expected = p.expected.map_or("-".to_string(), |e| e.to_string());
            let drift = p.drift_pct.map_or("-".to_string(), |d| format!("{d:+.1}%"));
            s.push_str(&format!(
                "{:<40} {:>9} {:>9} {:>8}\n",
                p.slug, p.commits, expected, drift
            ));
        }
        let t = &self.totals;
        s.push_str(&format!(
            "total: {} projects, {} commits, {} file entries, +{} / -{} lines, {} developers\n",
            t.projects, t.commits, t.file_entries, t.insertions, t.deletions, t.unique_authors
        ));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("no extracts to verify")]
    NoExtracts,
}

/// Compare extracted commit counts with the manifest and total the corpus.
pub fn verify_corpus(
    entries: &[ProjectEntry],
    extracts: &BTreeMap<String, Vec<CommitRecord>>,
) -> Result<CorpusReport, CorpusError> {
    if extracts.is_empty() {
        return Err(CorpusError::NoExtracts);
    }
    let by_slug: BTreeMap<&str, &ProjectEntry> =
        entries.iter().map(|e| (e.slug.as_str(), e)).collect();
    let projects = extracts
        .iter()
        .map(|(slug, records)| {
            let expected = by_slug.get(slug.as_str()).and_then(|e| e.expected_commits);
            ProjectDrift {
                slug: slug.clone(),
                commits: records.len(),
                expected,
                drift_pct: expected.map(|e| 100.0 * (records.len() as f64 - e as f64) / e as f64),
            }
        })
        .collect();
    Ok(CorpusReport {
        projects,
        totals: CorpusTotals::of(extracts.values().map(Vec::as_slice)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gitlog::FileChange;

    #[test]
    fn default_manifest_has_46_projects() {
        let m = default_manifest();
        assert_eq!(m.len(), 46);
        let pin = parse_until(DEFAULT_PIN).unwrap();
        assert!(m
            .iter()
            .all(|e| e.pin_until == Some(pin) && e.expected_commits.is_some()));
        let scribe = m
            .iter()
            .find(|e| e.slug == "scribejava/scribejava")
            .unwrap();
        assert_eq!(scribe.expected_commits, Some(954));
        let bourbon = m.iter().find(|e| e.slug == "thoughtbot/bourbon").unwrap();
        assert_eq!(bourbon.expected_commits, Some(1439));
        let total: u64 = m.iter().filter_map(|e| e.expected_commits).sum();
        assert_eq!(total, 145_715);
    }

    #[test]
    fn pin_dates() {
        assert_eq!(parse_until("2019-06-30").unwrap(), 1_561_939_199);
        assert_eq!(parse_until("2019-06-30T00:00:00Z").unwrap(), 1_561_852_800);
        assert_eq!(parse_until("1561939199").unwrap(), 1_561_939_199);
        assert!(parse_until("0").is_err());
        assert!(parse_until("June").is_err());
    }

    #[test]
    fn duplicate_slug_is_fatal() {
        let text = r#"
[[project]]
slug = "a/b"
[[project]]
slug = "A/b"
"#;
        match parse_manifest(text) {
            Err(ManifestError::DuplicateSlug { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_entry_names_index() {
        let text = r#"
[[project]]
slug = "a/b"
[[project]]
slug = "c/d"
expected_commits = -3
[[project]]
slug = "e/f"
"#;
        match parse_manifest(text) {
            Err(ManifestError::Entry { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_manifest("[[project]]\nslug = \"nope\"\n"),
            Err(ManifestError::Entry { index: 0, .. })
        ));
        assert!(matches!(
            parse_manifest("[[project]]\nslug = \"a/b\"\nstars = 3\n"),
            Err(ManifestError::Entry { index: 0, .. })
        ));
    }

    #[test]
    fn url_defaults_to_github() {
        let m = parse_manifest("[[project]]\nslug = \"a/b\"\npin_until = 2019-06-30\n").unwrap();
        assert_eq!(m[0].clone_url, "https://github.com/a/b.git");
        assert_eq!(m[0].pin_until, Some(1_561_939_199));
        assert_eq!(m[0].cache_key(), "a__b");
        assert_eq!(slug_from_key("a__b"), "a/b");
    }

    fn recs(n: usize, author: &str) -> Vec<CommitRecord> {
        (0..n)
            .map(|i| CommitRecord {
                commit_id: format!("{author}{i}"),
                author_id: author.into(),
                timestamp: 1 + i as i64,
                message: String::new(),
                is_merge: false,
                changes: vec![FileChange::text("a.c", 2, 1)],
            })
            .collect()
    }

    #[test]
    fn verify_drift_and_totals() {
        let entries = parse_manifest(
            "[[project]]\nslug = \"a/b\"\nexpected_commits = 10\n[[project]]\nslug = \"c/d\"\nexpected_commits = 4\n",
        )
        .unwrap();
        let mut extracts = BTreeMap::new();
        extracts.insert("a/b".to_string(), recs(10, "x"));
        extracts.insert("c/d".to_string(), recs(5, "y"));
        let rep = verify_corpus(&entries, &extracts).unwrap();
        assert_eq!(rep.projects[0].drift_pct, Some(0.0));
        assert_eq!(rep.projects[1].drift_pct, Some(25.0));
        assert_eq!(
            rep.totals,
            CorpusTotals {
                projects: 2,
                commits: 15,
                file_entries: 15,
                insertions: 30,
                deletions: 15,
                unique_authors: 2,
            }
        );
        assert!(rep.render().contains("+25.0%"));
        assert_eq!(
            verify_corpus(&entries, &BTreeMap::new()),
            Err(CorpusError::NoExtracts)
        );
    }
}
