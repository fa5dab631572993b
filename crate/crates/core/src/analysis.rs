//! Per-project correlation matrix and corpus aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::BeliefId;
use crate::config::RunConfig;
use crate::corpus::CorpusTotals;
use crate::gitlog::CommitRecord;
use crate::labeler::{bugfix_fraction, FileCategory};
use crate::metrics::{assemble_samples, build_histories, little_set_counts};
use crate::report::{BeliefSummary, SummaryTotals};
use crate::stats::{five_number, median_sorted, summarize, CorrelationResult};

/// Every belief × category cell for one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project: String,
    pub cells: Vec<CorrelationResult>,
    pub little_sets: BTreeMap<FileCategory, usize>,
    /// Analyzed (non-static) files per category.
    pub files: BTreeMap<FileCategory, usize>,
    /// `None` for a project without commits.
    pub bugfix_fraction: Option<f64>,
}

impl ProjectReport {
    pub fn cell(&self, belief: BeliefId, category: FileCategory) -> Option<&CorrelationResult> {
        self.cells
            .iter()
            .find(|c| c.belief == belief && c.category == category)
    }
}

pub fn analyze_project(project: &str, records: &[CommitRecord], cfg: &RunConfig) -> ProjectReport {
    let histories = build_histories(records, &cfg.keywords, &cfg.categories);
    let mut cells = Vec::with_capacity(BeliefId::ALL.len() * FileCategory::ANALYZED.len());
    for belief in BeliefId::ALL {
        for category in FileCategory::ANALYZED {
            let s = assemble_samples(&histories, belief, category);
            cells.push(CorrelationResult::compute(
                project,
                belief,
                category,
                &s.xs,
                &s.ys,
                cfg.strong_threshold,
            ));
        }
    }
    let mut files: BTreeMap<FileCategory, usize> =
        FileCategory::ANALYZED.iter().map(|c| (*c, 0)).collect();
    for h in histories.values() {
        *files.entry(h.category).or_insert(0) += 1;
    }
    ProjectReport {
        project: project.to_string(),
        cells,
        little_sets: little_set_counts(&histories),
        files,
        bugfix_fraction: bugfix_fraction(records, &cfg.keywords).ok(),
    }
}

/// Results of a whole corpus run, ready for emission.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusAnalysis {
    pub reports: Vec<ProjectReport>,
    pub beliefs: Vec<BeliefSummary>,
    pub totals: SummaryTotals,
    pub little_sets: BTreeMap<FileCategory, usize>,
}

/// Analyze projects in parallel, then aggregate in project-name order.
pub fn analyze_corpus(
    projects: &BTreeMap<String, Vec<CommitRecord>>,
    cfg: &RunConfig,
) -> CorpusAnalysis {
    let mut reports: Vec<ProjectReport> = projects
        .par_iter()
        .map(|(name, records)| analyze_project(name, records, cfg))
        .collect();
    reports.sort_by(|a, b| a.project.cmp(&b.project));

    let beliefs = summarize_beliefs(&reports);

    let mut little_sets: BTreeMap<FileCategory, usize> =
        FileCategory::ANALYZED.iter().map(|c| (*c, 0)).collect();
    let mut files = little_sets.clone();
    for r in &reports {
        for (c, n) in &r.little_sets {
            *little_sets.entry(*c).or_insert(0) += n;
        }
        for (c, n) in &r.files {
            *files.entry(*c).or_insert(0) += n;
        }
    }
    let fractions: Vec<f64> = reports.iter().filter_map(|r| r.bugfix_fraction).collect();
    let totals = SummaryTotals {
        corpus: CorpusTotals::of(projects.values().map(Vec::as_slice)),
        files,
        bugfix_fraction_mean: (!fractions.is_empty())
            .then(|| fractions.iter().sum::<f64>() / fractions.len() as f64),
        bugfix_fraction_min: fractions.iter().copied().reduce(f64::min),
    };
    CorpusAnalysis {
        reports,
        beliefs,
        totals,
        little_sets,
    }
}

/// Per-category distributions and the pooled median for every belief.
pub fn summarize_beliefs(reports: &[ProjectReport]) -> Vec<BeliefSummary> {
    BeliefId::ALL
        .into_iter()
        .map(|belief| {
            let categories = FileCategory::ANALYZED
                .into_iter()
                .map(|category| {
                    let cells: Vec<CorrelationResult> = reports
                        .iter()
                        .filter_map(|r| r.cell(belief, category).cloned())
                        .collect();
                    summarize(belief, category, &cells).expect("cells filtered by group")
                })
                .collect();
            let mut pooled: Vec<f64> = reports
                .iter()
                .flat_map(|r| r.cells.iter())
                .filter(|c| c.belief == belief)
                .filter_map(|c| c.rho)
                .collect();
            pooled.sort_by(f64::total_cmp);
            let meta = belief.meta();
            BeliefSummary {
                belief,
                statement: meta.statement,
                agree_pct: meta.agree_pct,
                pooled_median: (!pooled.is_empty()).then(|| median_sorted(&pooled)),
                pooled: five_number(&pooled),
                pooled_count: pooled.len(),
                categories,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gitlog::FileChange;
    use crate::stats::Strength;

    fn rec(id: &str, ts: i64, msg: &str, changes: Vec<FileChange>) -> CommitRecord {
        CommitRecord {
            commit_id: id.into(),
            author_id: "a@x".into(),
            timestamp: ts,
            message: msg.into(),
            is_merge: false,
            changes,
        }
    }

    #[test]
    fn empty_category_cells_are_undefined() {
        let recs = vec![
            rec("1", 10, "fix", vec![FileChange::text("a.c", 1, 0)]),
            rec(
                "2",
                20,
                "fix",
                vec![FileChange::text("a.c", 1, 0), FileChange::text("b.c", 1, 0)],
            ),
        ];
        let r = analyze_project("p", &recs, &RunConfig::default());
        assert_eq!(r.cells.len(), 24);
        let t = r.cell(BeliefId::B6, FileCategory::Test).unwrap();
        assert_eq!((t.n, t.rho, t.strength), (0, None, Strength::Undefined));
        let s = r.cell(BeliefId::B6, FileCategory::Source).unwrap();
        assert_eq!(s.n, 2);
        assert!((s.rho.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.bugfix_fraction, Some(1.0));
    }

    #[test]
    fn pooled_median_ignores_project_order() {
        let mut projects = BTreeMap::new();
        for (i, name) in ["x/a", "y/b", "z/c"].iter().enumerate() {
            let mut recs = Vec::new();
            for k in 0..(6 + i) {
                let msg = if k % (2 + i) == 0 { "fix" } else { "add" };
                let files = (0..=k % 3)
                    .map(|f| FileChange::text(format!("f{f}.c"), k as u64, 1))
                    .collect();
                recs.push(rec(&format!("{k:03}"), 100 + k as i64, msg, files));
            }
            projects.insert(name.to_string(), recs);
        }
        let cfg = RunConfig::default();
        let a = analyze_corpus(&projects, &cfg);
        let mut reversed = a.reports.clone();
        reversed.reverse();
        assert_eq!(summarize_beliefs(&reversed), a.beliefs);
        assert_eq!(a.totals.corpus.projects, 3);
    }
}
