//! Per-file histories, defect counts and the eight belief metrics.
//!
//! Files with no bug-fixing commit form the "little set": they are counted
//! per category but left out of every correlation sample.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::belief::BeliefId;
use crate::gitlog::CommitRecord;
use crate::labeler::{classify_commit, CategoryRules, FileCategory, KeywordSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeEvent {
    pub timestamp: i64,
    pub author_id: String,
    pub lines_added: u64,
    pub lines_deleted: u64,
    pub is_bugfix: bool,
}

impl ChangeEvent {
    fn is_nonzero(&self) -> bool {
        self.lines_added + self.lines_deleted > 0
    }
}

/// Timeline of one path. Events are in ascending time order and never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHistory {
    pub path: String,
    pub category: FileCategory,
    pub created_at: i64,
    pub events: Vec<ChangeEvent>,
    /// Lines added per author; every author with an event has an entry.
    pub per_author_added: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DefectCount(pub u64);

pub type Histories = BTreeMap<String, FileHistory>;

/// Fold commits into one history per non-static path.
pub fn build_histories(
    records: &[CommitRecord],
    keywords: &KeywordSet,
    rules: &CategoryRules,
) -> Histories {
    let mut out: Histories = BTreeMap::new();
    for rec in records {
        let is_bugfix = classify_commit(&rec.message, keywords);
        for change in &rec.changes {
            let h = match out.get_mut(&change.path) {
                Some(h) => h,
                None => {
                    let category = rules.categorize(&change.path);
                    if category == FileCategory::Static {
                        continue;
                    }
                    out.entry(change.path.clone())
                        .or_insert_with(|| FileHistory {
                            path: change.path.clone(),
                            category,
                            created_at: rec.timestamp,
                            events: Vec::new(),
                            per_author_added: BTreeMap::new(),
                        })
                }
            };
            h.events.push(ChangeEvent {
                timestamp: rec.timestamp,
                author_id: rec.author_id.clone(),
                lines_added: change.lines_added,
                lines_deleted: change.lines_deleted,
                is_bugfix,
            });
            *h.per_author_added.entry(rec.author_id.clone()).or_insert(0) += change.lines_added;
        }
    }
    for h in out.values_mut() {
        // stable, so same-second events keep commit order
        h.events.sort_by_key(|e| e.timestamp);
        h.created_at = h.events[0].timestamp;
    }
    out
}

pub fn defect_proneness(h: &FileHistory) -> DefectCount {
    DefectCount(h.events.iter().filter(|e| e.is_bugfix).count() as u64)
}

/// Distinct authors with at least one non-zero change.
pub fn b1_developers(h: &FileHistory) -> u64 {
    h.events
        .iter()
        .filter(|e| e.is_nonzero())
        .map(|e| e.author_id.as_str())
        .collect::<BTreeSet<_>>()
        .len() as u64
}

pub fn b2_added(h: &FileHistory) -> u64 {
    h.events.iter().map(|e| e.lines_added).sum()
}

/// `(created_at, interval)` where the interval runs from creation to the
/// first fix, or between the two latest fixes when there are several.
pub fn b3_pair(h: &FileHistory) -> Option<(i64, i64)> {
    let fixes: Vec<i64> = h
        .events
        .iter()
        .filter(|e| e.is_bugfix)
        .map(|e| e.timestamp)
        .collect();
    match fixes.as_slice() {
        [] => None,
        [only] => Some((h.created_at, only - h.created_at)),
        [.., prev, last] => Some((h.created_at, last - prev)),
    }
}

/// Churn: lines added plus lines deleted over the whole history.
pub fn b4_loc(h: &FileHistory) -> u64 {
    h.events
        .iter()
        .map(|e| e.lines_added + e.lines_deleted)
        .sum()
}

/// Fix counts in the earlier and later halves of the history. The earlier
/// half holds `floor(n / 2)` events. `None` for fewer than two events.
pub fn b5_pair(h: &FileHistory) -> Option<(u64, u64)> {
    let n = h.events.len();
    if n < 2 {
        return None;
    }
    let (early, late) = h.events.split_at(n / 2);
    let fixes = |s: &[ChangeEvent]| s.iter().filter(|e| e.is_bugfix).count() as u64;
    Some((fixes(early), fixes(late)))
}

pub fn b6_commits(h: &FileHistory) -> u64 {
    h.events.len() as u64
}

pub fn b7_deleted(h: &FileHistory) -> u64 {
    h.events.iter().map(|e| e.lines_deleted).sum()
}

/// Percentage of the file's authors who added strictly less than 5% of its
/// added lines. `None` when nothing was ever added.
pub fn b8_minor_pct(h: &FileHistory) -> Option<f64> {
    let total: u64 = h.per_author_added.values().sum();
    if total == 0 || h.per_author_added.is_empty() {
        return None;
    }
    // added / total < 1/20, kept in integers so 5% exactly is not minor
    let minor = h
        .per_author_added
        .values()
        .filter(|&&added| (added as u128) * 20 < total as u128)
        .count();
    Some(100.0 * minor as f64 / h.per_author_added.len() as f64)
}

/// Metric value for the x side of a belief that is paired with D.
fn metric_for(belief: BeliefId, h: &FileHistory) -> Option<f64> {
    match belief {
        BeliefId::B1 => Some(b1_developers(h) as f64),
        BeliefId::B2 => Some(b2_added(h) as f64),
        BeliefId::B4 => Some(b4_loc(h) as f64),
        BeliefId::B6 => Some(b6_commits(h) as f64),
        BeliefId::B7 => Some(b7_deleted(h) as f64),
        BeliefId::B8 => b8_minor_pct(h),
        BeliefId::B3 | BeliefId::B5 => unreachable!("paired beliefs are not metric-vs-D"),
    }
}

/// Paired observations behind one correlation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSample {
    pub belief: BeliefId,
    pub category: FileCategory,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Files of the category with no bug-fixing commit.
    pub little_set: usize,
    /// Files with fixes that the belief cannot be measured on.
    pub not_applicable: usize,
    /// Paths in sample order.
    pub paths: Vec<String>,
}

impl BeliefSample {
    pub fn n(&self) -> usize {
        self.xs.len()
    }
}

/// Build the (x, y) sample for one belief over one category's files.
///
/// B3 and B5 use their own pairs; every other belief pairs its metric with D.
pub fn assemble_samples(
    histories: &Histories,
    belief: BeliefId,
    category: FileCategory,
) -> BeliefSample {
    let mut sample = BeliefSample {
        belief,
        category,
        xs: Vec::new(),
        ys: Vec::new(),
        little_set: 0,
        not_applicable: 0,
        paths: Vec::new(),
    };
    for h in histories.values().filter(|h| h.category == category) {
        let d = defect_proneness(h).0;
        if d == 0 {
            sample.little_set += 1;
            continue;
        }
        let pair = match belief {
            BeliefId::B3 => b3_pair(h).map(|(x, y)| (x as f64, y as f64)),
            BeliefId::B5 => b5_pair(h).map(|(x, y)| (x as f64, y as f64)),
            other => metric_for(other, h).map(|x| (x, d as f64)),
        };
        match pair {
            Some((x, y)) => {
                sample.xs.push(x);
                sample.ys.push(y);
                sample.paths.push(h.path.clone());
            }
            None => sample.not_applicable += 1,
        }
    }
    sample
}

/// Files per category with zero defect fixes.
pub fn little_set_counts(histories: &Histories) -> BTreeMap<FileCategory, usize> {
    let mut out: BTreeMap<FileCategory, usize> =
        FileCategory::ANALYZED.iter().map(|c| (*c, 0)).collect();
    for h in histories.values() {
        if defect_proneness(h).0 == 0 {
            *out.entry(h.category).or_insert(0) += 1;
        }
    }
    out
}
