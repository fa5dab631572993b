//! Synthetic extracts with planted metric/defect correlations, and a
//! brute-force oracle for every per-file metric.
//!
//! The oracle deliberately shares no code with [`crate::metrics`]: it rescans
//! the raw commit list once per file and per quantity.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::belief::BeliefId;
use crate::gitlog::{CommitRecord, FileChange};
use crate::labeler::{CategoryRules, FileCategory, KeywordSet};

const BASE_TIME: i64 = 1_262_304_000; // 2010-01-01

const FIX_MESSAGES: [&str; 8] = [
    "Fix crash when loading {}",
    "Fix off-by-one in {}",
    "Resolve issue #{} in parser",
    "Correct handling of empty input ({})",
    "Patch memory leak in {}",
    "Bug {}: wrong default value",
    "Address broken build on {}",
    "Avoid error on missing key {}",
];

const PLAIN_MESSAGES: [&str; 8] = [
    "Add {} support",
    "Update documentation for {}",
    "Refactor module {}",
    "Rename helper {}",
    "Add tests around {}",
    "Bump version to 0.{}",
    "Introduce new option {}",
    "Clean up unused imports in {}",
];

/// Parameters of a synthetic project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub source_files: usize,
    pub test_files: usize,
    pub config_files: usize,
    pub static_files: usize,
    pub n_commits: usize,
    /// At most one planted belief; see [`PLANTABLE`].
    pub target_rho: BTreeMap<BeliefId, f64>,
    pub bugfix_rate: f64,
    pub author_pool: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            source_files: 20,
            test_files: 8,
            config_files: 4,
            static_files: 2,
            n_commits: 100,
            target_rho: BTreeMap::new(),
            bugfix_rate: 0.3,
            author_pool: 6,
        }
    }
}

/// Beliefs whose metric the generator can couple to D.
pub const PLANTABLE: [BeliefId; 4] = [BeliefId::B2, BeliefId::B4, BeliefId::B6, BeliefId::B7];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("n_commits must be at least 1")]
    NoCommits,
    #[error("bugfix_rate must be within [0, 1], got {0}")]
    BadRate(f64),
    #[error("author_pool must be at least 1")]
    NoAuthors,
    #[error("target_rho for {0} must be within [-1, 1], got {1}")]
    BadTarget(BeliefId, f64),
    #[error("cannot plant a correlation for {0}; supported: B2, B4, B6, B7")]
    NotPlantable(BeliefId),
    #[error("only one planted belief per project, got {0}")]
    TooManyTargets(usize),
    #[error("unsatisfiable spec: {0}")]
    Unsatisfiable(String),
}

impl SynthSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.n_commits == 0 {
            return Err(SynthError::NoCommits);
        }
        if !(0.0..=1.0).contains(&self.bugfix_rate) {
            return Err(SynthError::BadRate(self.bugfix_rate));
        }
        if self.author_pool == 0 {
            return Err(SynthError::NoAuthors);
        }
        if self.target_rho.len() > 1 {
            return Err(SynthError::TooManyTargets(self.target_rho.len()));
        }
        for (&b, &r) in &self.target_rho {
            if !PLANTABLE.contains(&b) {
                return Err(SynthError::NotPlantable(b));
            }
            if !(-1.0..=1.0).contains(&r) {
                return Err(SynthError::BadTarget(b, r));
            }
        }
        Ok(())
    }

    fn analyzed_files(&self) -> usize {
        self.source_files + self.test_files + self.config_files
    }
}

fn file_names(spec: &SynthSpec) -> Vec<String> {
    const SRC_EXT: [&str; 5] = ["rb", "py", "c", "java", "js"];
    let mut v = Vec::new();
    for i in 0..spec.source_files {
        v.push(format!("lib/mod_{i:04}.{}", SRC_EXT[i % SRC_EXT.len()]));
    }
    for i in 0..spec.test_files {
        v.push(format!("spec/unit_{i:04}_test.rb"));
    }
    for i in 0..spec.config_files {
        v.push(format!("config/settings_{i:04}.yml"));
    }
    for i in 0..spec.static_files {
        v.push(format!("assets/img_{i:04}.png"));
    }
    v
}

fn message(rng: &mut ChaCha8Rng, fix: bool) -> String {
    let pool = if fix { &FIX_MESSAGES } else { &PLAIN_MESSAGES };
    let template = pool.choose(rng).expect("non-empty");
    template.replace("{}", &rng.random_range(1..500u32).to_string())
}

fn change_for(path: &str, added: u64, deleted: u64) -> FileChange {
    if path.ends_with(".png") {
        FileChange::binary(path)
    } else {
        FileChange::text(path, added, deleted)
    }
}

struct Skeleton {
    ids: Vec<String>,
    times: Vec<i64>,
    authors: Vec<String>,
}

fn skeleton(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Skeleton {
    let mut t = BASE_TIME;
    let mut ids = Vec::with_capacity(spec.n_commits);
    let mut times = Vec::with_capacity(spec.n_commits);
    let mut authors = Vec::with_capacity(spec.n_commits);
    for k in 0..spec.n_commits {
        // occasional same-second commits exercise the id tie-break
        t += if rng.random_bool(0.05) {
            0
        } else {
            rng.random_range(60..86_400)
        };
        ids.push(format!("{:08x}{:032x}", k, rng.random::<u128>()));
        times.push(t);
        authors.push(format!(
            "dev{:02}@example.org",
            rng.random_range(0..spec.author_pool)
        ));
    }
    Skeleton {
        ids,
        times,
        authors,
    }
}

/// Generate a schema-valid, time-sorted extract. Same spec, same output.
pub fn generate(spec: &SynthSpec) -> Result<Vec<CommitRecord>, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let files = file_names(spec);
    let sk = skeleton(spec, &mut rng);

    let mut records = match spec.target_rho.iter().next() {
        None => random_commits(spec, &files, &sk, &mut rng),
        Some((&belief, &rho)) => planted_commits(spec, &files, &sk, belief, rho, &mut rng)?,
    };
    crate::gitlog::sort_records(&mut records);
    Ok(records)
}

fn random_commits(
    spec: &SynthSpec,
    files: &[String],
    sk: &Skeleton,
    rng: &mut ChaCha8Rng,
) -> Vec<CommitRecord> {
    (0..spec.n_commits)
        .map(|k| {
            let fix = rng.random_bool(spec.bugfix_rate);
            let touched = if files.is_empty() {
                0
            } else {
                rng.random_range(1..=files.len().min(4))
            };
            let changes = files
                .choose_multiple(rng, touched)
                .map(|p| {
                    let (a, d) = if rng.random_bool(0.08) {
                        (0, 0)
                    } else {
                        (rng.random_range(0..60), rng.random_range(0..30))
                    };
                    change_for(p, a, d)
                })
                .collect();
            CommitRecord {
                commit_id: sk.ids[k].clone(),
                author_id: sk.authors[k].clone(),
                timestamp: sk.times[k],
                message: message(rng, fix),
                is_merge: false,
                changes,
            }
        })
        .collect()
}

/// Split `total` into `parts` non-negative integers.
fn composition(total: u64, parts: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut cuts: Vec<u64> = (0..parts.saturating_sub(1))
        .map(|_| rng.random_range(0..=total))
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// Couple each analyzed file's metric to its defect count through a shared
/// Gaussian latent: metric ~ z, D ~ rho * z + sqrt(1 - rho^2) * e.
fn planted_commits(
    spec: &SynthSpec,
    files: &[String],
    sk: &Skeleton,
    belief: BeliefId,
    rho: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CommitRecord>, SynthError> {
    let n_fix = (spec.n_commits as f64 * spec.bugfix_rate).round() as usize;
    if n_fix == 0 && spec.analyzed_files() > 0 {
        return Err(SynthError::Unsatisfiable(format!(
            "planting {belief} needs bug-fixing commits but bugfix_rate gives none"
        )));
    }
    let mut slots: Vec<bool> = (0..spec.n_commits).map(|i| i < n_fix).collect();
    slots.shuffle(rng);
    let fix_idx: Vec<usize> = (0..spec.n_commits).filter(|&i| slots[i]).collect();
    let plain_idx: Vec<usize> = (0..spec.n_commits).filter(|&i| !slots[i]).collect();

    let mut changes: Vec<Vec<FileChange>> = vec![Vec::new(); spec.n_commits];
    let analyzed = &files[..spec.analyzed_files()];
    let noise = (1.0 - rho * rho).max(0.0).sqrt();
    for path in analyzed {
        let z: f64 = rng.sample(StandardNormal);
        let e: f64 = rng.sample(StandardNormal);
        let w = rho * z + noise * e;
        let d = (6.0 + 2.5 * w).round().max(1.0) as usize;
        let (events, metric) = match belief {
            BeliefId::B6 => (((30.0 + 8.0 * z).round().max(1.0) as usize).max(d), None),
            _ => (
                d + rng.random_range(0..=3),
                Some((400.0 + 120.0 * z).round().max(0.0) as u64),
            ),
        };
        let plain = events - d;
        if d > fix_idx.len() || plain > plain_idx.len() {
            return Err(SynthError::Unsatisfiable(format!(
                "{path} needs {d} fixing and {plain} other commits; spec has {} and {}",
                fix_idx.len(),
                plain_idx.len()
            )));
        }
        let mut chosen: Vec<usize> = fix_idx.choose_multiple(rng, d).copied().collect();
        chosen.extend(plain_idx.choose_multiple(rng, plain).copied());
        let (adds, dels): (Vec<u64>, Vec<u64>) = match (belief, metric) {
            (BeliefId::B2, Some(m)) => (
                composition(m, events, rng),
                (0..events).map(|_| rng.random_range(0..20)).collect(),
            ),
            (BeliefId::B7, Some(m)) => (
                (0..events).map(|_| rng.random_range(0..20)).collect(),
                composition(m, events, rng),
            ),
            (BeliefId::B4, Some(m)) => composition(m, events, rng)
                .into_iter()
                .map(|churn| {
                    let a = rng.random_range(0..=churn);
                    (a, churn - a)
                })
                .unzip(),
            _ => (
                (0..events).map(|_| rng.random_range(1..40)).collect(),
                (0..events).map(|_| rng.random_range(0..20)).collect(),
            ),
        };
        for (k, idx) in chosen.into_iter().enumerate() {
            changes[idx].push(FileChange::text(path.clone(), adds[k], dels[k]));
        }
    }
    for path in &files[spec.analyzed_files()..] {
        let idx = rng.random_range(0..spec.n_commits);
        changes[idx].push(change_for(path, 0, 0));
    }

    Ok(changes
        .into_iter()
        .enumerate()
        .map(|(k, mut ch)| {
            ch.sort_by(|a, b| a.path.cmp(&b.path));
            CommitRecord {
                commit_id: sk.ids[k].clone(),
                author_id: sk.authors[k].clone(),
                timestamp: sk.times[k],
                message: message(rng, slots[k]),
                is_merge: false,
                changes: ch,
            }
        })
        .collect())
}

/// Every per-file quantity, recomputed from raw records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMetrics {
    pub category: FileCategory,
    pub d: u64,
    pub b1: u64,
    pub b2: u64,
    pub b3: Option<(i64, i64)>,
    pub b4: u64,
    pub b5: Option<(u64, u64)>,
    pub b6: u64,
    pub b7: u64,
    pub b8: Option<f64>,
}

fn is_fix(msg: &str, keywords: &KeywordSet) -> bool {
    let lower = msg.to_lowercase();
    for stem in keywords.stems() {
        if lower.contains(stem.as_str()) {
            return true;
        }
    }
    false
}

/// Naive recomputation of D and the eight metrics for every non-static path.
/// `records` must be sorted by time.
pub fn oracle_metrics(
    records: &[CommitRecord],
    keywords: &KeywordSet,
    rules: &CategoryRules,
) -> BTreeMap<String, OracleMetrics> {
    let mut paths = BTreeSet::new();
    for r in records {
        for c in &r.changes {
            paths.insert(c.path.clone());
        }
    }
    let mut out = BTreeMap::new();
    for path in paths {
        let category = rules.categorize(&path);
        if category == FileCategory::Static {
            continue;
        }
        // (commit index, change) for every touch of this path, in record order
        let mut touches: Vec<(usize, &FileChange)> = Vec::new();
        for (i, r) in records.iter().enumerate() {
            for c in &r.changes {
                if c.path == path {
                    touches.push((i, c));
                }
            }
        }

        let mut d = 0;
        for (i, _) in &touches {
            if is_fix(&records[*i].message, keywords) {
                d += 1;
            }
        }

        let mut devs: Vec<&str> = Vec::new();
        for (i, c) in &touches {
            let a = records[*i].author_id.as_str();
            if (c.lines_added > 0 || c.lines_deleted > 0) && !devs.contains(&a) {
                devs.push(a);
            }
        }

        let mut b2 = 0;
        let mut b7 = 0;
        for (_, c) in &touches {
            b2 += c.lines_added;
            b7 += c.lines_deleted;
        }
        let mut b4 = 0;
        for (_, c) in &touches {
            b4 += c.lines_added;
            b4 += c.lines_deleted;
        }

        let created = records[touches[0].0].timestamp;
        let mut fix_times: Vec<i64> = Vec::new();
        for (i, _) in &touches {
            if is_fix(&records[*i].message, keywords) {
                fix_times.push(records[*i].timestamp);
            }
        }
        let b3 = if fix_times.is_empty() {
            None
        } else if fix_times.len() == 1 {
            Some((created, fix_times[0] - created))
        } else {
            let k = fix_times.len();
            Some((created, fix_times[k - 1] - fix_times[k - 2]))
        };

        let n = touches.len();
        let b5 = if n < 2 {
            None
        } else {
            let mut first = 0;
            let mut second = 0;
            for (pos, (i, _)) in touches.iter().enumerate() {
                if is_fix(&records[*i].message, keywords) {
                    if 2 * pos < n - n % 2 {
                        first += 1;
                    } else {
                        second += 1;
                    }
                }
            }
            Some((first, second))
        };

        let mut per_author: Vec<(String, u64)> = Vec::new();
        for (i, c) in &touches {
            let a = &records[*i].author_id;
            match per_author.iter_mut().find(|(x, _)| x == a) {
                Some(entry) => entry.1 += c.lines_added,
                None => per_author.push((a.clone(), c.lines_added)),
            }
        }
        let b8 = if b2 == 0 {
            None
        } else {
            let minor = per_author
                .iter()
                .filter(|(_, added)| (*added as f64) / (b2 as f64) < 0.05)
                .count();
            Some(minor as f64 / per_author.len() as f64 * 100.0)
        };

        out.insert(
            path,
            OracleMetrics {
                category,
                d,
                b1: devs.len() as u64,
                b2,
                b3,
                b4,
                b5,
                b6: n as u64,
                b7,
                b8,
            },
        );
    }
    out
}
