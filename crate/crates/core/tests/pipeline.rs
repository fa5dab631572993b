mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use beliefbench::analysis::analyze_project;
use beliefbench::config::RunConfig;
use beliefbench::gitlog::{read_extract, write_extract};
use beliefbench::labeler::{CategoryRules, FileCategory, KeywordSet};
use beliefbench::metrics::{self, build_histories};
use beliefbench::synth::{generate, oracle_metrics, SynthSpec};
use beliefbench::BeliefId;

fn spec(seed: u64, n_commits: usize) -> SynthSpec {
    SynthSpec {
        seed,
        n_commits,
        ..SynthSpec::default()
    }
}

#[test]
fn thousand_record_round_trip() {
    let recs = generate(&SynthSpec {
        seed: 5,
        n_commits: 1000,
        source_files: 60,
        ..SynthSpec::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.jsonl");
    write_extract(&recs, &p).unwrap();
    let back = read_extract(&p).unwrap();
    assert_eq!(back.len(), 1000);
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!(a.commit_id, b.commit_id);
        assert_eq!(a.author_id, b.author_id);
        assert_eq!(a.timestamp, b.timestamp);
        assert_eq!(a.message, b.message);
        assert_eq!(a.is_merge, b.is_merge);
        assert_eq!(a.changes, b.changes);
    }
}

#[test]
fn histories_match_group_by() {
    let recs = generate(&spec(21, 100)).unwrap();
    let rules = CategoryRules::default();
    let hs = build_histories(&recs, &KeywordSet::default(), &rules);

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fixes: BTreeMap<&str, u64> = BTreeMap::new();
    for r in &recs {
        let msg = r.message.to_lowercase();
        let fix = beliefbench::labeler::DEFAULT_STEMS
            .iter()
            .any(|s| msg.contains(s));
        for c in &r.changes {
            if rules.categorize(&c.path) == FileCategory::Static {
                continue;
            }
            *counts.entry(&c.path).or_default() += 1;
            *fixes.entry(&c.path).or_default() += fix as u64;
        }
    }
    assert_eq!(hs.len(), counts.len());
    for (path, n) in counts {
        let h = &hs[path];
        assert_eq!(h.events.len(), n, "{path}");
        assert_eq!(metrics::defect_proneness(h).0, fixes[path], "{path}");
        assert!(h
            .events
            .windows(2)
            .all(|w| w[0].timestamp <= w[1].timestamp));
        assert_eq!(h.created_at, h.events[0].timestamp);
    }
}

fn assert_matches_oracle(recs: &[beliefbench::CommitRecord]) -> Result<(), TestCaseError> {
    let kw = KeywordSet::default();
    let rules = CategoryRules::default();
    let hs = build_histories(recs, &kw, &rules);
    let oracle = oracle_metrics(recs, &kw, &rules);
    prop_assert_eq!(hs.len(), oracle.len());
    for (path, o) in &oracle {
        let h = &hs[path];
        prop_assert_eq!(h.category, o.category);
        prop_assert_eq!(metrics::defect_proneness(h).0, o.d);
        prop_assert_eq!(metrics::b1_developers(h), o.b1);
        prop_assert_eq!(metrics::b2_added(h), o.b2);
        prop_assert_eq!(metrics::b3_pair(h), o.b3);
        prop_assert_eq!(metrics::b4_loc(h), o.b4);
        prop_assert_eq!(metrics::b5_pair(h), o.b5);
        prop_assert_eq!(metrics::b6_commits(h), o.b6);
        prop_assert_eq!(metrics::b7_deleted(h), o.b7);
        match (metrics::b8_minor_pct(h), o.b8) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metrics_agree_with_oracle(seed in any::<u64>(), n in 1usize..120, authors in 1usize..8) {
        let recs = generate(&SynthSpec { seed, n_commits: n, author_pool: authors, ..SynthSpec::default() }).unwrap();
        assert_matches_oracle(&recs)?;
    }

    #[test]
    fn generation_is_seed_deterministic(seed in any::<u64>()) {
        let s = spec(seed, 30);
        prop_assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
    }
}

#[test]
fn fifty_commit_extract_equals_oracle() {
    let recs = generate(&spec(50, 50)).unwrap();
    assert_matches_oracle(&recs).unwrap();
}

#[test]
fn b6_sample_pairs_match_oracle_file_by_file() {
    let recs = generate(&SynthSpec {
        seed: 9,
        source_files: 60,
        test_files: 0,
        config_files: 0,
        static_files: 0,
        n_commits: 600,
        target_rho: BTreeMap::from([(BeliefId::B6, 0.6)]),
        ..SynthSpec::default()
    })
    .unwrap();
    let kw = KeywordSet::default();
    let rules = CategoryRules::default();
    let hs = build_histories(&recs, &kw, &rules);
    let sample = metrics::assemble_samples(&hs, BeliefId::B6, FileCategory::Source);
    let oracle = oracle_metrics(&recs, &kw, &rules);
    let expected: Vec<(&String, f64, f64)> = oracle
        .iter()
        .filter(|(_, o)| o.d > 0)
        .map(|(p, o)| (p, o.b6 as f64, o.d as f64))
        .collect();
    assert_eq!(sample.n(), expected.len());
    for (i, (p, x, y)) in expected.into_iter().enumerate() {
        assert_eq!(&sample.paths[i], p);
        assert_eq!((sample.xs[i], sample.ys[i]), (x, y));
    }
}

#[test]
fn planted_correlations_are_recovered() {
    for (belief, target, seed) in [
        (BeliefId::B6, 0.8, 1u64),
        (BeliefId::B2, 0.5, 2),
        (BeliefId::B4, 0.3, 3),
        (BeliefId::B7, -0.4, 4),
    ] {
        let recs = generate(&SynthSpec {
            seed,
            source_files: 300,
            test_files: 0,
            config_files: 0,
            static_files: 0,
            n_commits: 1500,
            target_rho: BTreeMap::from([(belief, target)]),
            ..SynthSpec::default()
        })
        .unwrap();
        let r = analyze_project("synth", &recs, &RunConfig::default());
        let rho = r.cell(belief, FileCategory::Source).unwrap().rho.unwrap();
        assert!(
            (rho - target).abs() <= 0.1,
            "{belief}: planted {target}, measured {rho}"
        );
    }
}
