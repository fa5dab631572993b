//! Pearson correlation, strength classes and distribution summaries.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::belief::BeliefId;
use crate::labeler::FileCategory;

/// Correlations strictly above this are "strong".
pub const STRONG_THRESHOLD: f64 = 0.7;

/// Pearson's r, or `None` when it is undefined (fewer than two points, a
/// constant column, or non-finite input).
///
/// Single pass over the data using running means and co-moments.
///
/// # Panics
///
/// If `xs` and `ys` differ in length.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(
        xs.len(),
        ys.len(),
        "pearson: length mismatch ({} vs {})",
        xs.len(),
        ys.len()
    );
    if xs.len() < 2 {
        return None;
    }
    let (mut mx, mut my) = (0.0f64, 0.0f64);
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let k = (i + 1) as f64;
        let dx = x - mx;
        let dy = y - my;
        mx += dx / k;
        my += dy / k;
        sxx += dx * (x - mx);
        syy += dy * (y - my);
        sxy += dx * (y - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    r.is_finite().then(|| r.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strength {
    Strong,
    NotStrong,
    Undefined,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Strong => "strong",
            Strength::NotStrong => "not_strong",
            Strength::Undefined => "undefined",
        }
    }
}

impl std::str::FromStr for Strength {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strong" => Ok(Strength::Strong),
            "not_strong" => Ok(Strength::NotStrong),
            "undefined" => Ok(Strength::Undefined),
            other => Err(format!("unknown strength `{other}`")),
        }
    }
}

pub fn classify_strength(rho: Option<f64>) -> Strength {
    classify_strength_with(rho, STRONG_THRESHOLD)
}

pub fn classify_strength_with(rho: Option<f64>, threshold: f64) -> Strength {
    match rho {
        None => Strength::Undefined,
        Some(r) if r > threshold => Strength::Strong,
        Some(_) => Strength::NotStrong,
    }
}

/// One (project, belief, category) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub project: String,
    pub belief: BeliefId,
    pub category: FileCategory,
    pub n: usize,
    pub rho: Option<f64>,
    pub strength: Strength,
}

impl CorrelationResult {
    pub fn compute(
        project: &str,
        belief: BeliefId,
        category: FileCategory,
        xs: &[f64],
        ys: &[f64],
        threshold: f64,
    ) -> Self {
        let rho = pearson(xs, ys);
        Self {
            project: project.to_string(),
            belief,
            category,
            n: xs.len(),
            rho,
            strength: classify_strength_with(rho, threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Spread of one belief × category cell across projects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub belief: BeliefId,
    pub category: FileCategory,
    /// `None` when no project produced a defined ρ.
    pub quartiles: Option<FiveNumber>,
    pub count: usize,
    pub undefined_count: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("result for {project} is {belief}/{category}, expected {want_belief}/{want_category}")]
    MixedGroup {
        project: String,
        belief: BeliefId,
        category: FileCategory,
        want_belief: BeliefId,
        want_category: FileCategory,
    },
}

/// Median of a sorted, non-empty slice.
pub fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Tukey hinges: quartiles are the medians of the lower and upper halves,
/// both halves including the median when `n` is odd.
pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    let half = n.div_ceil(2);
    Some(FiveNumber {
        min: v[0],
        q1: median_sorted(&v[..half]),
        median: median_sorted(&v),
        q3: median_sorted(&v[n - half..]),
        max: v[n - 1],
    })
}

pub fn summarize(
    belief: BeliefId,
    category: FileCategory,
    results: &[CorrelationResult],
) -> Result<DistributionSummary, StatsError> {
    if let Some(r) = results
        .iter()
        .find(|r| r.belief != belief || r.category != category)
    {
        return Err(StatsError::MixedGroup {
            project: r.project.clone(),
            belief: r.belief,
            category: r.category,
            want_belief: belief,
            want_category: category,
        });
    }
    let defined: Vec<f64> = results.iter().filter_map(|r| r.rho).collect();
    Ok(DistributionSummary {
        belief,
        category,
        quartiles: five_number(&defined),
        count: defined.len(),
        undefined_count: results.len() - defined.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Textbook two-pass evaluation, kept apart from the streaming version.
    fn two_pass(xs: &[f64], ys: &[f64]) -> Option<f64> {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut dx2 = 0.0;
        let mut dy2 = 0.0;
        for i in 0..xs.len() {
            num += (xs[i] - mx) * (ys[i] - my);
            dx2 += (xs[i] - mx).powi(2);
            dy2 += (ys[i] - my).powi(2);
        }
        if dx2 == 0.0 || dy2 == 0.0 {
            None
        } else {
            Some(num / (dx2 * dy2).sqrt())
        }
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1., 2., 3.], &[2., 4., 6.]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1., 2., 3.], &[3., 2., 1.]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[5., 5., 5.], &[1., 2., 3.]), None);
        assert_eq!(pearson(&[1.], &[1.]), None);
        assert_eq!(pearson(&[], &[]), None);
    }

    #[test]
    fn pearson_four_points() {
        // hand evaluation: sxy = 5.5, sxx = 5, syy = 8.75
        let oracle = two_pass(&[1., 2., 3., 4.], &[1., 3., 2., 5.]).unwrap();
        assert!((oracle - 5.5 / 43.75f64.sqrt()).abs() < 1e-15);
        let r = pearson(&[1., 2., 3., 4.], &[1., 3., 2., 5.]).unwrap();
        assert!((r - 0.8315).abs() < 1e-3, "{r}");
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn pearson_length_mismatch_panics() {
        pearson(&[1., 2.], &[1.]);
    }

    #[test]
    fn strength_boundaries() {
        assert_eq!(classify_strength(Some(0.71)), Strength::Strong);
        assert_eq!(classify_strength(Some(0.70)), Strength::NotStrong);
        assert_eq!(classify_strength(Some(-0.9)), Strength::NotStrong);
        assert_eq!(classify_strength(None), Strength::Undefined);
    }

    fn cell(rho: Option<f64>) -> CorrelationResult {
        CorrelationResult {
            project: "p".into(),
            belief: BeliefId::B1,
            category: FileCategory::Source,
            n: 3,
            rho,
            strength: classify_strength(rho),
        }
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(BeliefId::B1, FileCategory::Source, &[cell(Some(0.1))]).unwrap();
        let q = s.quartiles.unwrap();
        assert_eq!(
            (q.min, q.q1, q.median, q.q3, q.max),
            (0.1, 0.1, 0.1, 0.1, 0.1)
        );

        let s = summarize(
            BeliefId::B1,
            FileCategory::Source,
            &[
                cell(Some(1.0)),
                cell(Some(0.0)),
                cell(None),
                cell(Some(0.5)),
            ],
        )
        .unwrap();
        let q = s.quartiles.unwrap();
        assert_eq!(
            (q.min, q.q1, q.median, q.q3, q.max),
            (0.0, 0.25, 0.5, 0.75, 1.0)
        );
        assert_eq!((s.count, s.undefined_count), (3, 1));

        let s = summarize(
            BeliefId::B1,
            FileCategory::Source,
            &[cell(None), cell(None)],
        )
        .unwrap();
        assert_eq!(s.quartiles, None);
        assert_eq!((s.count, s.undefined_count), (0, 2));
    }

    #[test]
    fn hinges_even_count() {
        // lower half [1,2] upper half [3,4]
        let q = five_number(&[4., 1., 3., 2.]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.5, 2.5, 3.5));
    }

    #[test]
    fn summarize_rejects_mixed_groups() {
        let mut other = cell(Some(0.2));
        other.belief = BeliefId::B2;
        assert!(summarize(
            BeliefId::B1,
            FileCategory::Source,
            &[cell(Some(0.1)), other]
        )
        .is_err());
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec(-1e3f64..1e3, n),
                prop::collection::vec(-1e3f64..1e3, n),
            )
        })
    }

    proptest! {
        #[test]
        fn symmetric((xs, ys) in pair()) {
            match (pearson(&xs, &ys), pearson(&ys, &xs)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn affine_invariance(
            (xs, ys) in pair(),
            a in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0],
            b in -100.0f64..100.0,
            c in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0],
            d in -100.0f64..100.0,
        ) {
            let base = pearson(&xs, &ys);
            let tx: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let ty: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
            if let (Some(r0), Some(r1)) = (base, pearson(&tx, &ty)) {
                prop_assert!((r1 - (a * c).signum() * r0).abs() < 1e-9, "{} vs {}", r0, r1);
            }
        }

        #[test]
        fn bounded_and_matches_oracle((xs, ys) in pair()) {
            if let Some(r) = pearson(&xs, &ys) {
                prop_assert!((-1.0..=1.0).contains(&r));
                let o = two_pass(&xs, &ys).unwrap();
                prop_assert!((r - o).abs() < 1e-12);
            }
        }

        #[test]
        fn hinges_are_ordered(v in prop::collection::vec(-1.0f64..1.0, 1..40)) {
            let q = five_number(&v).unwrap();
            prop_assert!(q.min <= q.q1 && q.q1 <= q.median && q.median <= q.q3 && q.q3 <= q.max);
        }
    }
}
