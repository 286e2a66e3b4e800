mod common;

use std::collections::BTreeSet;

use common::close;
use guidebench::metrics::{
    assemble_report, bootstrap_ci, bsi, delta_cas, jaccard, BootstrapSettings, CaseResult, CasResult, CasWeights,
    CbstResult, CbstWeights, DecisionPointResult, MetricConfig, NeedleResult, ReverseResult, ReverseWeights,
};
use guidebench::scenario::ScenarioKind;
use guidebench::Error;
use proptest::prelude::*;

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn decision_examples() {
    let perfect = DecisionPointResult::from_counts(4, 4, 4);
    assert_eq!((perfect.precision, perfect.recall, perfect.f, perfect.score10), (1.0, 1.0, 1.0, 10.0));
    let partial = DecisionPointResult::from_counts(4, 4, 3);
    assert!(close(partial.precision, 0.75) && close(partial.recall, 0.75) && close(partial.score10, 7.5));
    let none = DecisionPointResult::from_counts(0, 4, 0);
    assert_eq!((none.precision, none.f, none.score10), (0.0, 0.0, 0.0));
}

#[test]
fn needle_table_values() {
    assert_eq!(NeedleResult::from_flags(true, true).score, 1.0);
    assert_eq!(NeedleResult::from_flags(true, false).score, 0.5);
    assert_eq!(NeedleResult::from_flags(false, true).score, 0.5);
    assert_eq!(NeedleResult::from_flags(false, false).score, 0.0);
}

#[test]
fn reverse_composite_examples() {
    let w = ReverseWeights::default();
    let r = ReverseResult::from_components(1, 8, 0.9, 0.8, 1.0, &w);
    assert!(close(r.consistency, 0.875));
    assert!(close(r.composite10, 8.8), "{}", r.composite10);
    assert!(r.consistency_gate && r.completeness_gate);
    assert!(close(ReverseResult::from_components(0, 8, 1.0, 1.0, 1.0, &w).composite10, 10.0));
    let floored = ReverseResult::from_components(9, 8, 1.0, 1.0, 1.0, &w);
    assert_eq!(floored.consistency, 0.0);
    assert!(!floored.consistency_gate);
    assert!(!ReverseResult::from_components(0, 8, 0.85, 1.0, 1.0, &w).completeness_gate);
}

#[test]
fn cas_examples() {
    let w = CasWeights::default();
    assert!(close(CasResult::from_components(1.0, 1.0, 1.0, 1.0, &w).cas10, 10.0));
    let pred = set(&["Pentavalent", "PCV13"]);
    let req = set(&["Pentavalent", "PCV10", "OPV"]);
    assert!(close(jaccard(&pred, &req), 0.25));
    assert_eq!(jaccard(&BTreeSet::new(), &req), 0.0);
}

#[test]
fn delta_cas_examples() {
    let ke = set(&["Pentavalent", "PCV10", "OPV"]);
    let za = set(&["Hexavalent", "PCV13", "RV"]);
    assert!(close(delta_cas(10.0, 10.0, &ke, &za, &ke, &za), 10.0));

    // Keys overlapping at J = 0.2 (1 shared of 5), predictions identical.
    let ka = set(&["a", "b", "c"]);
    let kb = set(&["c", "d", "e"]);
    assert!(close(jaccard(&ka, &kb), 0.2));
    assert!(close(delta_cas(6.0, 6.0, &ka, &ka, &ka, &kb), -2.0));

    assert!(close(delta_cas(7.0, 7.0, &ke, &ke, &ke, &ke), 7.0));
}

#[test]
fn cbst_examples() {
    let w = CbstWeights::default();
    assert!(close(CbstResult::from_components(true, true, 1.0, 1.0, &w).cbst10, 10.0));
    assert!(close(CbstResult::from_components(true, true, 0.5, 0.0, &w).cbst10, 7.5));
}

#[test]
fn bsi_examples() {
    let w = CbstWeights::default();
    let r = |flex| CbstResult::from_components(flex, false, 0.0, 0.0, &w);
    let mixed: Vec<_> = (0..10).map(|i| r(i >= 3)).collect();
    assert!(close(bsi(&mixed).unwrap(), 0.3));
    assert_eq!(bsi(&vec![r(true); 4]).unwrap(), 0.0);
    assert_eq!(bsi(&vec![r(false); 4]).unwrap(), 1.0);
    assert!(matches!(bsi(&[]), Err(Error::EmptyInput(_))));
}

#[test]
fn default_weights_validate_and_bad_sums_fail() {
    MetricConfig::default().validate().unwrap();
    let bad = CasWeights {
        antigen: 0.5,
        ..CasWeights::default()
    };
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
    let neg = CbstWeights {
        flexibility: -0.1,
        breadth: 0.7,
        ..CbstWeights::default()
    };
    assert!(matches!(neg.validate(), Err(Error::Config(_))));
}

#[test]
fn bootstrap_examples() {
    let s = bootstrap_ci(&[3.0; 5], 1000, 0.95, 1).unwrap();
    assert_eq!((s.ci_low, s.ci_high), (3.0, 3.0));
    let coin: Vec<f64> = (0..200).map(|i| (i % 2) as f64).collect();
    let a = bootstrap_ci(&coin, 2000, 0.95, 9).unwrap();
    let b = bootstrap_ci(&coin, 2000, 0.95, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.ci_low <= 0.5 && 0.5 <= a.ci_high);
    assert!(a.ci_low >= 0.0 && a.ci_high <= 1.0);
    assert!(matches!(bootstrap_ci(&[], 10, 0.95, 1), Err(Error::EmptyInput(_))));
    assert!(matches!(bootstrap_ci(&[1.0], 10, 1.0, 1), Err(Error::Precondition(_))));
    assert!(matches!(bootstrap_ci(&[1.0], 0, 0.95, 1), Err(Error::Precondition(_))));
}

#[test]
fn report_shapes() {
    let one = [CaseResult::Needle {
        scenario_id: "n1".into(),
        result: NeedleResult::from_flags(true, true),
    }];
    let r = assemble_report("m", &one, BootstrapSettings::default()).unwrap();
    assert_eq!(r.sections.len(), 1);
    assert_eq!(r.sections[0].cases.len(), 1);
    assert!(matches!(
        assemble_report("m", &[], BootstrapSettings::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn five_metric_report_has_no_overall_score() {
    let e = guidebench_eval();
    let kinds: Vec<ScenarioKind> = e.sections.iter().map(|s| s.metric).collect();
    assert_eq!(kinds, ScenarioKind::ALL.to_vec());
    let json: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    assert!(keys.iter().all(|k| !k.contains("overall") && !k.contains("total")), "{keys:?}");
}

fn guidebench_eval() -> guidebench::metrics::MetricReport {
    let dir = tempfile::tempdir().unwrap();
    common::run_fixture_evaluation(dir.path()).unwrap();
    let body = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    serde_json::from_str(&body).unwrap()
}

#[test]
fn decision_matches_oracle() {
    common::oracle_decision(300, 11).unwrap();
}

#[test]
fn needle_matches_oracle() {
    common::oracle_needle(200, 12).unwrap();
}

#[test]
fn reverse_matches_oracle() {
    common::oracle_reverse(100, 13).unwrap();
}

#[test]
fn cas_matches_oracle() {
    common::oracle_cas(300, 14).unwrap();
}

#[test]
fn cbst_matches_oracle() {
    common::oracle_cbst(200, 15).unwrap();
}

fn label_set() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set("[a-f]", 0..6)
}

proptest! {
    #[test]
    fn jaccard_symmetric_and_bounded(a in label_set(), b in label_set()) {
        let j = jaccard(&a, &b);
        prop_assert_eq!(j, jaccard(&b, &a));
        prop_assert!((0.0..=1.0).contains(&j));
        if !a.is_empty() {
            prop_assert_eq!(jaccard(&a, &a), 1.0);
        }
        if !a.is_empty() && !b.is_empty() && a.is_disjoint(&b) {
            prop_assert_eq!(j, 0.0);
        }
    }

    #[test]
    fn composites_stay_in_range(
        c in 0usize..12, q in 0usize..12,
        x in 0.0f64..=1.0, y in 0.0f64..=1.0, z in 0.0f64..=1.0, u in 0.0f64..=1.0,
        f in any::<bool>(), k in any::<bool>(),
    ) {
        let rev = ReverseResult::from_components(c, q, x, y, z, &ReverseWeights::default());
        prop_assert!((0.0..=1.0).contains(&rev.consistency));
        prop_assert!((-1e-12..=10.0 + 1e-12).contains(&rev.composite10));
        let cas = CasResult::from_components(x, y, z, u, &CasWeights::default());
        prop_assert!((-1e-12..=10.0 + 1e-12).contains(&cas.cas10));
        let cb = CbstResult::from_components(f, k, x, y, &CbstWeights::default());
        prop_assert!((-1e-12..=10.0 + 1e-12).contains(&cb.cbst10));
        if !f && !k {
            prop_assert!(cb.cbst10 <= 10.0 * (0.20 * x + 0.15 * y) + 1e-12);
        }
    }

    #[test]
    fn decision_f_is_harmonic_mean(n_crit in 1usize..8, extra in 0usize..8, hit_frac in 0.0f64..=1.0) {
        let hit = (hit_frac * n_crit as f64).floor() as usize;
        let r = DecisionPointResult::from_counts(hit + extra, n_crit, hit);
        prop_assert!((0.0..=1.0).contains(&r.f));
        prop_assert!(close(r.score10, 10.0 * r.f));
        if hit > 0 {
            let (p, rc) = (hit as f64 / (hit + extra) as f64, hit as f64 / n_crit as f64);
            prop_assert!(close(r.f, 2.0 * p * rc / (p + rc)));
        } else {
            prop_assert_eq!(r.f, 0.0);
        }
    }

    #[test]
    fn delta_penalty_only_when_predictions_overlap_more(
        pa in label_set(), pb in label_set(), ra in label_set(), rb in label_set(),
        ca in 0.0f64..=10.0, cb in 0.0f64..=10.0,
    ) {
        let d = delta_cas(ca, cb, &pa, &pb, &ra, &rb);
        let mean = (ca + cb) / 2.0;
        prop_assert!(d <= mean + 1e-12);
        if jaccard(&pa, &pb) <= jaccard(&ra, &rb) {
            prop_assert!(close(d, mean));
        }
        prop_assert!(close(delta_cas(ca, cb, &pa, &pa, &ra, &ra), mean));
    }

    #[test]
    fn bootstrap_reproducible_and_bracketed(
        xs in prop::collection::vec(0.0f64..10.0, 1..30), seed in any::<u64>(),
    ) {
        let a = bootstrap_ci(&xs, 200, 0.9, seed).unwrap();
        prop_assert_eq!(a, bootstrap_ci(&xs, 200, 0.9, seed).unwrap());
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-12 <= a.ci_low && a.ci_low <= a.ci_high && a.ci_high <= hi + 1e-12);
    }

    #[test]
    fn bsi_counts_failures(flags in prop::collection::vec(any::<bool>(), 1..40)) {
        let w = CbstWeights::default();
        let rs: Vec<_> = flags.iter().map(|&f| CbstResult::from_components(f, false, 0.0, 0.0, &w)).collect();
        let failed = flags.iter().filter(|f| !**f).count() as f64 / flags.len() as f64;
        prop_assert!(close(bsi(&rs).unwrap(), failed));
    }
}
