//! The `extract`, `analyze` and `report` commands.
//!
//! Exit codes: 0 success, 1 fatal input error, 2 every project failed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::{analyze_corpus, CorpusAnalysis};
use crate::config::RunConfig;
use crate::corpus::{self, ProjectEntry};
use crate::gitlog::{self, CommitRecord};
use crate::report::{self, DiscrepancyRow, SummaryDoc};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("all {0} projects failed")]
    AllFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::AllFailed(_) => 2,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// Manifest from `path`, or the bundled one.
pub fn manifest_or_default(path: Option<&Path>) -> Result<Vec<ProjectEntry>, CliError> {
    match path {
        Some(p) => corpus::load_manifest(p).map_err(input),
        None => Ok(corpus::default_manifest()),
    }
}

pub fn config_or_default(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p).map_err(input),
        None => Ok(RunConfig::default()),
    }
}

#[derive(Debug)]
pub struct ExtractSummary {
    pub outcomes: Vec<corpus::ExtractOutcome>,
    pub verification: Option<corpus::CorpusReport>,
}

/// Acquire and extract every manifest project into `cache_dir`.
pub fn cmd_extract(
    entries: &[ProjectEntry],
    cache_dir: &Path,
    until: Option<i64>,
    jobs: usize,
) -> Result<ExtractSummary, CliError> {
    if entries.is_empty() {
        return Err(CliError::Input("manifest has no projects".into()));
    }
    let outcomes = corpus::extract_corpus(entries, cache_dir, until, jobs);
    let mut extracts = BTreeMap::new();
    for o in &outcomes {
        match &o.result {
            Ok(path) => {
                let records = gitlog::read_extract(path).map_err(input)?;
                extracts.insert(o.slug.clone(), records);
            }
            Err(e) => log::error!("{e}"),
        }
    }
    if extracts.is_empty() {
        return Err(CliError::AllFailed(outcomes.len()));
    }
    let verification = corpus::verify_corpus(entries, &extracts).ok();
    Ok(ExtractSummary {
        outcomes,
        verification,
    })
}

/// Every `*.jsonl` extract in `cache_dir`, keyed by project slug.
pub fn load_extracts(cache_dir: &Path) -> Result<BTreeMap<String, Vec<CommitRecord>>, CliError> {
    let dir = std::fs::read_dir(cache_dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", cache_dir.display())))?;
    let mut paths: Vec<PathBuf> = dir
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut out = BTreeMap::new();
    for p in paths {
        let key = p
            .file_stem()
            .expect("has stem")
            .to_string_lossy()
            .into_owned();
        let records = gitlog::read_extract(&p).map_err(input)?;
        out.insert(corpus::slug_from_key(&key), records);
    }
    Ok(out)
}

/// Correlate every extract in `cache_dir` and write `results.csv` and
/// `summary.json` to `out_dir`.
pub fn cmd_analyze(
    cache_dir: &Path,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<CorpusAnalysis, CliError> {
    cfg.validate().map_err(input)?;
    let extracts = load_extracts(cache_dir)?;
    if extracts.is_empty() {
        return Err(CliError::Input(format!(
            "no extracts in {}",
            cache_dir.display()
        )));
    }
    let analysis = analyze_corpus(&extracts, cfg);
    let doc = SummaryDoc {
        config_hash: cfg.hash(),
        beliefs: analysis.beliefs.clone(),
        totals: analysis.totals.clone(),
        little_sets: analysis.little_sets.clone(),
    };
    report::emit_tables(&analysis.reports, &doc, out_dir).map_err(input)?;
    Ok(analysis)
}

/// Boxplots and the discrepancy table from a `summary.json`.
pub fn cmd_report(
    summary: &Path,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<Vec<DiscrepancyRow>, CliError> {
    let doc = report::read_summary(summary).map_err(input)?;
    report::emit_boxplots(&doc.beliefs, out_dir, cfg.strong_threshold).map_err(input)?;
    let rows = report::discrepancy_table(&doc.beliefs, &crate::belief::roster());
    report::write_discrepancy(&rows, out_dir).map_err(input)?;
    Ok(rows)
}
