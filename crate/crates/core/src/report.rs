//! Result tables, boxplots and the agreement-vs-evidence discrepancy table.
//!
//! Files written:
//! - `results.csv`: `project,belief,category,n,rho,strength`, one row per cell
//! - `summary.json`: `config_hash`, `beliefs[]`, `totals{}`, `little_sets{}`
//! - `belief_<id>.svg`: one boxplot panel per belief
//! - `discrepancy.csv`: survey rank vs median-ρ rank per belief

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ProjectReport;
use crate::belief::{BeliefId, BeliefMeta};
use crate::corpus::CorpusTotals;
use crate::labeler::FileCategory;
use crate::stats::{CorrelationResult, DistributionSummary, FiveNumber, Strength};

/// Rank gap at which a belief is flagged as a discrepancy.
pub const DISCREPANCY_GAP: usize = 4;

pub const RESULTS_HEADER: [&str; 6] = ["project", "belief", "category", "n", "rho", "strength"];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Csv { path: PathBuf, detail: String },
    #[error("{path}: malformed summary: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("nothing to report")]
    Empty,
}

/// Distributions of one belief across projects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    pub belief: BeliefId,
    pub statement: String,
    pub agree_pct: u8,
    /// Median over every defined cell of the belief, all categories pooled.
    pub pooled_median: Option<f64>,
    pub pooled: Option<FiveNumber>,
    pub pooled_count: usize,
    /// Config, test and source distributions, in that order.
    pub categories: Vec<DistributionSummary>,
}

impl BeliefSummary {
    pub fn category(&self, c: FileCategory) -> Option<&DistributionSummary> {
        self.categories.iter().find(|d| d.category == c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTotals {
    #[serde(flatten)]
    pub corpus: CorpusTotals,
    /// Analyzed files per category.
    pub files: BTreeMap<FileCategory, usize>,
    pub bugfix_fraction_mean: Option<f64>,
    pub bugfix_fraction_min: Option<f64>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub config_hash: String,
    pub beliefs: Vec<BeliefSummary>,
    pub totals: SummaryTotals,
    pub little_sets: BTreeMap<FileCategory, usize>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_rho(rho: Option<f64>) -> String {
    rho.map(|r| format!("{r}")).unwrap_or_default()
}

pub fn results_csv(reports: &[ProjectReport]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).expect("in-memory write");
    for c in reports.iter().flat_map(|r| r.cells.iter()) {
        w.write_record([
            c.project.as_str(),
            c.belief.as_str(),
            c.category.as_str(),
            &c.n.to_string(),
            &fmt_rho(c.rho),
            c.strength.as_str(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Write `results.csv` and `summary.json` into `out_dir`.
pub fn emit_tables(
    reports: &[ProjectReport],
    summary: &SummaryDoc,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Empty);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let csv_path = out_dir.join("results.csv");
    fs::write(&csv_path, results_csv(reports)).map_err(io_err(&csv_path))?;
    let json_path = out_dir.join("summary.json");
    let mut json = serde_json::to_string_pretty(summary).expect("summary serializes");
    json.push('\n');
    fs::write(&json_path, json).map_err(io_err(&json_path))?;
    Ok(vec![csv_path, json_path])
}

pub fn read_results(path: &Path) -> Result<Vec<CorrelationResult>, ReportError> {
    let bad = |detail: String| ReportError::Csv {
        path: path.to_path_buf(),
        detail,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let field = |k: usize| row.get(k).unwrap_or("");
        let cell = (|| -> Result<CorrelationResult, String> {
            Ok(CorrelationResult {
                project: field(0).to_string(),
                belief: field(1).parse().map_err(|e| format!("{e}"))?,
                category: field(2).parse().map_err(|e| format!("{e}"))?,
                n: field(3).parse().map_err(|e| format!("n: {e}"))?,
                rho: match field(4) {
                    "" => None,
                    s => Some(s.parse().map_err(|e| format!("rho: {e}"))?),
                },
                strength: field(5).parse::<Strength>()?,
            })
        })()
        .map_err(|e| bad(format!("line {line}: {e}")))?;
        out.push(cell);
    }
    Ok(out)
}

pub fn read_summary(path: &Path) -> Result<SummaryDoc, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Beliefs by descending pooled median; undefined medians last, ties by id.
pub fn order_by_median(summaries: &[BeliefSummary]) -> Vec<BeliefId> {
    let mut v: Vec<(BeliefId, Option<f64>)> = summaries
        .iter()
        .map(|s| (s.belief, s.pooled_median))
        .collect();
    v.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.0.cmp(&b.0)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.0.cmp(&b.0),
    });
    v.into_iter().map(|(b, _)| b).collect()
}

// plot geometry
const W: f64 = 360.0;
const H: f64 = 300.0;
const LEFT: f64 = 48.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 52.0;
const BOTTOM: f64 = 44.0;

fn y_of(rho: f64) -> f64 {
    let plot_h = H - TOP - BOTTOM;
    TOP + (1.0 - rho.clamp(-1.0, 1.0)) / 2.0 * plot_h
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Render one belief's C/T/S boxplots as a standalone SVG document.
pub fn render_boxplot(s: &BeliefSummary, rank: usize, threshold: f64) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#
    );
    let median = s
        .pooled_median
        .map_or("n/a".to_string(), |m| format!("{m:.3}"));
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13" font-weight="bold">{} (rank {rank}) · median ρ = {median}</text>"#,
        W / 2.0,
        s.belief
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="34" text-anchor="middle" font-size="9">{}</text>"#,
        W / 2.0,
        escape(&truncate(&s.statement, 64))
    );

    // axis, grid and labels
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let y = y_of(tick);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            W - RIGHT
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick:.1}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let ty = y_of(threshold);
    let _ = writeln!(
        svg,
        r##"<line x1="{LEFT:.2}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="#cc3333" stroke-dasharray="4,3"/>"##,
        W - RIGHT
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="black"/>"#,
        H - BOTTOM
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{:.2}" transform="rotate(-90 12 {:.2})" text-anchor="middle">ρ</text>"#,
        H / 2.0,
        H / 2.0
    );

    let slot = (W - LEFT - RIGHT) / FileCategory::ANALYZED.len() as f64;
    let box_w = slot * 0.45;
    for (i, cat) in FileCategory::ANALYZED.into_iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let x0 = cx - box_w / 2.0;
        let dist = s.category(cat);
        let count = dist.map_or(0, |d| d.count);
        match dist.and_then(|d| d.quartiles) {
            Some(q) => {
                let (ymin, yq1, ymed, yq3, ymax) = (
                    y_of(q.min),
                    y_of(q.q1),
                    y_of(q.median),
                    y_of(q.q3),
                    y_of(q.max),
                );
                let _ = writeln!(
                    svg,
                    r#"<line x1="{cx:.2}" y1="{ymax:.2}" x2="{cx:.2}" y2="{yq3:.2}" stroke="black"/>"#
                );
                let _ = writeln!(
                    svg,
                    r#"<line x1="{cx:.2}" y1="{yq1:.2}" x2="{cx:.2}" y2="{ymin:.2}" stroke="black"/>"#
                );
                for y in [ymin, ymax] {
                    let _ = writeln!(
                        svg,
                        r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                        cx - box_w / 4.0,
                        cx + box_w / 4.0
                    );
                }
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x0:.2}" y="{yq3:.2}" width="{box_w:.2}" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
                    (yq1 - yq3).max(0.0)
                );
                let _ = writeln!(
                    svg,
                    r#"<line x1="{x0:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="black" stroke-width="2"/>"#,
                    x0 + box_w
                );
            }
            None => {
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x0:.2}" y="{:.2}" width="{box_w:.2}" height="{:.2}" fill="none" stroke="#999999" stroke-dasharray="3,3"/>"##,
                    y_of(0.25),
                    y_of(-0.25) - y_of(0.25)
                );
                let _ = writeln!(
                    svg,
                    r##"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" fill="#999999">n=0</text>"##,
                    y_of(0.0) + 4.0
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{}</text>"#,
            H - BOTTOM + 16.0,
            cat.letter()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="9">n={count}</text>"#,
            H - BOTTOM + 30.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(max - 1).collect();
        t.push('…');
        t
    }
}

/// Write `belief_<id>.svg` for every summary. Paths come back in descending
/// pooled-median order, which is also the rank printed in each title.
pub fn emit_boxplots(
    summaries: &[BeliefSummary],
    out_dir: &Path,
    threshold: f64,
) -> Result<Vec<PathBuf>, ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::Empty);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let by_id: BTreeMap<BeliefId, &BeliefSummary> =
        summaries.iter().map(|s| (s.belief, s)).collect();
    let mut paths = Vec::new();
    for (i, id) in order_by_median(summaries).into_iter().enumerate() {
        let path = out_dir.join(format!("belief_{id}.svg"));
        fs::write(&path, render_boxplot(by_id[&id], i + 1, threshold)).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub belief: BeliefId,
    pub agree_pct: u8,
    pub agreement_rank: usize,
    pub pooled_median: Option<f64>,
    /// `None` when the belief has no defined correlation.
    pub empirical_rank: Option<usize>,
    pub flagged: bool,
}

impl DiscrepancyRow {
    pub fn comparable(&self) -> bool {
        self.empirical_rank.is_some()
    }

    pub fn rank_gap(&self) -> Option<usize> {
        self.empirical_rank.map(|e| e.abs_diff(self.agreement_rank))
    }
}

/// Survey-agreement rank vs empirical median-ρ rank for each belief in `meta`.
///
/// Agreement ties keep `meta` order. A belief is flagged when the two ranks
/// differ by [`DISCREPANCY_GAP`] or more.
pub fn discrepancy_table(summaries: &[BeliefSummary], meta: &[BeliefMeta]) -> Vec<DiscrepancyRow> {
    let mut by_agreement: Vec<&BeliefMeta> = meta.iter().collect();
    by_agreement.sort_by_key(|m| std::cmp::Reverse(m.agree_pct));
    let agreement_rank: BTreeMap<BeliefId, usize> = by_agreement
        .iter()
        .enumerate()
        .map(|(i, m)| (m.id, i + 1))
        .collect();

    let known: Vec<BeliefSummary> = summaries
        .iter()
        .filter(|s| s.pooled_median.is_some() && agreement_rank.contains_key(&s.belief))
        .cloned()
        .collect();
    let empirical_rank: BTreeMap<BeliefId, usize> = order_by_median(&known)
        .into_iter()
        .enumerate()
        .map(|(i, b)| (b, i + 1))
        .collect();
    let medians: BTreeMap<BeliefId, Option<f64>> = summaries
        .iter()
        .map(|s| (s.belief, s.pooled_median))
        .collect();

    meta.iter()
        .map(|m| {
            let agreement_rank = agreement_rank[&m.id];
            let empirical_rank = empirical_rank.get(&m.id).copied();
            DiscrepancyRow {
                belief: m.id,
                agree_pct: m.agree_pct,
                agreement_rank,
                pooled_median: medians.get(&m.id).copied().flatten(),
                empirical_rank,
                flagged: empirical_rank
                    .is_some_and(|e| e.abs_diff(agreement_rank) >= DISCREPANCY_GAP),
            }
        })
        .collect()
}

pub fn discrepancy_csv(rows: &[DiscrepancyRow]) -> String {
    let mut s =
        String::from("belief,agree_pct,agreement_rank,pooled_median,empirical_rank,status\n");
    for r in rows {
        let status = match (r.comparable(), r.flagged) {
            (false, _) => "incomparable",
            (true, true) => "discrepancy",
            (true, false) => "consistent",
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.belief,
            r.agree_pct,
            r.agreement_rank,
            fmt_rho(r.pooled_median),
            r.empirical_rank.map(|e| e.to_string()).unwrap_or_default(),
            status
        );
    }
    s
}

/// Plain-text rendering for terminals.
pub fn discrepancy_text(rows: &[DiscrepancyRow]) -> String {
    let mut s = String::from("belief  agree%  agree-rank  median-rho  rho-rank  status\n");
    for r in rows {
        let median = r
            .pooled_median
            .map_or("-".to_string(), |m| format!("{m:.3}"));
        let rank = r.empirical_rank.map_or("-".to_string(), |e| e.to_string());
        let status = match (r.comparable(), r.flagged) {
            (false, _) => "incomparable",
            (true, true) => "DISCREPANCY",
            (true, false) => "",
        };
        let _ = writeln!(
            s,
            "{:<6}  {:>6}  {:>10}  {:>10}  {:>8}  {}",
            r.belief.as_str(),
            r.agree_pct,
            r.agreement_rank,
            median,
            rank,
            status
        );
    }
    s
}

pub fn write_discrepancy(rows: &[DiscrepancyRow], out_dir: &Path) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let path = out_dir.join("discrepancy.csv");
    fs::write(&path, discrepancy_csv(rows)).map_err(io_err(&path))?;
    Ok(path)
}
