mod common;

use std::collections::BTreeSet;

use common::{all_scenarios, fixture, needle_fixture, reverse_fixture};
use guidebench::harness::{MockScript, ScriptedMock, ScriptedReply};
use guidebench::scenario::{
    answer_key, audit_needle_case, build_geo_pair, bundled_schedule, extract_decision_nodes, forge_with_backend,
    parse_schedule, render_marker, GeoTemplate, NeedleAudit, Node, Scenario, ScenarioKind,
};
use guidebench::vocab::Vocabulary;
use guidebench::Error;
use proptest::prelude::*;
use serde_json::json;

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn decision_fixture() -> guidebench::scenario::DecisionVignette {
    all_scenarios()
        .into_iter()
        .find_map(|s| match s {
            Scenario::Decision(v) if v.vignette_id == "dec-perfect" => Some(v),
            _ => None,
        })
        .unwrap()
}

#[test]
fn flow_markers_become_fixture_nodes() {
    let flow = std::fs::read_to_string(fixture("flows/imnci.flow")).unwrap();
    let ex = extract_decision_nodes(&flow, &Vocabulary::bundled()).unwrap();
    assert!(ex.warnings.is_empty());
    let critical: Vec<&str> = ex.nodes.iter().filter(|n| n.critical).map(|n| n.node_id.as_str()).collect();
    assert_eq!(critical, ["rr", "indrawing", "spo2", "vacc"]);
    assert_eq!(ex.nodes, decision_fixture().hidden_nodes);
}

#[test]
fn flow_edge_cases() {
    let vocab = Vocabulary::bundled();
    let empty = extract_decision_nodes("just prose\nno markers", &vocab).unwrap();
    assert!(empty.nodes.is_empty());
    assert_eq!(empty.warnings.len(), 1);
    let bad = "?NODE id=\"x\" critical=\"true\" label=\"x\" reveal=\"y\" colour=\"red\"";
    assert!(matches!(extract_decision_nodes(bad, &vocab), Err(Error::Structure(d)) if d[0].line == 1));
}

#[test]
fn fixture_needles_pass_audit() {
    for s in all_scenarios() {
        if let Scenario::Needle(c) = s {
            assert_eq!(audit_needle_case(&c), NeedleAudit::Pass, "{}", c.case_id);
        }
    }
}

fn fail_reasons(a: NeedleAudit) -> Vec<String> {
    match a {
        NeedleAudit::Fail { reasons } => reasons,
        NeedleAudit::Pass => panic!("expected a failing audit"),
    }
}

#[test]
fn needle_audit_failures() {
    let mut dup = needle_fixture();
    dup.narrative = format!("{} {}", dup.narrative, dup.needle.clue_text);
    assert!(fail_reasons(audit_needle_case(&dup)).contains(&"clue count = 2".to_string()));

    let mut few = needle_fixture();
    few.distractor_diagnoses.truncate(2);
    assert!(fail_reasons(audit_needle_case(&few)).contains(&"distractor count = 2".to_string()));

    let mut short = needle_fixture();
    short.narrative = short.needle.clue_text.clone();
    assert!(fail_reasons(audit_needle_case(&short))
        .iter()
        .any(|r| r.starts_with("word count")));
}

#[test]
fn geo_fixture_matches_builder() {
    let built = build_geo_pair(&bundled_schedule(), 10, "Kenya", "South Africa", &GeoTemplate::bundled()).unwrap();
    let fixture_pair = all_scenarios()
        .into_iter()
        .find_map(|s| match s {
            Scenario::Geo(g) => Some(g),
            _ => None,
        })
        .unwrap();
    assert_eq!(fixture_pair, built);
    assert_eq!(built.scenario_a.answer_key.required_antigens, set(&["Pentavalent", "PCV10", "OPV"]));
    assert_eq!(built.scenario_b.answer_key.required_antigens, set(&["Hexavalent", "PCV13", "RV"]));
}

#[test]
fn control_pair_has_identical_keys() {
    let p = build_geo_pair(&bundled_schedule(), 10, "Kenya", "Kenya", &GeoTemplate::bundled()).unwrap();
    assert_eq!(p.scenario_a.answer_key, p.scenario_b.answer_key);
}

#[test]
fn geo_data_gaps_and_schedule_errors() {
    let kb = bundled_schedule();
    assert!(matches!(answer_key(&kb, 10, "Atlantis"), Err(Error::DataGap(m)) if m.contains("Atlantis")));
    let bad_age = "country,age_weeks,antigen,formulation,constraints\nK,ten,A,,\n";
    assert!(parse_schedule(bad_age.as_bytes(), "t").is_err());
    let missing_col = "country,age_weeks\nK,6\n";
    assert!(parse_schedule(missing_col.as_bytes(), "t").is_err());
}

proptest! {
    #[test]
    fn geo_keys_are_pure(age in prop::sample::select(vec![6u32, 10, 14])) {
        let kb = bundled_schedule();
        for c in ["Kenya", "South Africa"] {
            prop_assert_eq!(answer_key(&kb, age, c).unwrap(), answer_key(&kb, age, c).unwrap());
        }
    }

    #[test]
    fn marker_render_round_trips(
        id in "[a-z][a-z0-9_]{0,8}",
        label in "[a-z]{2,8}( [a-z]{2,8}){0,2}",
        reveal in "[A-Za-z0-9 .,%\"\\\\]{0,20}[A-Za-z0-9.,%][A-Za-z0-9 .,%\"\\\\]{0,19}",
        critical in any::<bool>(),
    ) {
        let node = Node {
            node_id: id,
            label,
            synonyms: vec![],
            patterns: vec![],
            reveal_text: reveal,
            critical,
        };
        let empty = Vocabulary::new(vec![]).unwrap();
        let ex = extract_decision_nodes(&render_marker(&node), &empty).unwrap();
        prop_assert_eq!(ex.nodes, vec![node]);
    }
}

fn default_reply(reply: serde_json::Value) -> ScriptedMock {
    ScriptedMock::new(MockScript {
        default: vec![ScriptedReply::Text(format!("Here is the draft:\n{reply}"))],
        ..MockScript::default()
    })
}

#[test]
fn forged_needle_keeps_seed_clue() {
    let mut draft = serde_json::to_value(needle_fixture()).unwrap();
    draft["needle"]["clue_text"] = json!("something else");
    let seed = json!({"needle": {"clue_text": "returned from Bentiu, South Sudan"}});
    let s = forge_with_backend(ScenarioKind::Needle, &seed, &default_reply(draft), &Vocabulary::bundled()).unwrap();
    let Scenario::Needle(c) = s else { panic!("wrong kind") };
    assert_eq!(c.needle.clue_text, "returned from Bentiu, South Sudan");
    assert_eq!(c.case_id, needle_fixture().case_id);
}

#[test]
fn forged_persona_carries_fact_sheet() {
    let (persona, script) = reverse_fixture();
    let draft = json!({"persona": persona, "script": script});
    let seed = json!({"persona": {"demographics": {"county": "Siaya"}}});
    let s = forge_with_backend(ScenarioKind::Reverse, &seed, &default_reply(draft), &Vocabulary::bundled()).unwrap();
    let Scenario::Reverse(r) = s else { panic!("wrong kind") };
    assert!(r.persona.facts.len() >= 5);
    assert_eq!(r.persona.demographics.county, "Siaya");
}

#[test]
fn forge_rejects_prose_and_bad_seeds() {
    let mock = ScriptedMock::new(MockScript {
        default: vec![ScriptedReply::Text("I think the patient has malaria.".into())],
        ..MockScript::default()
    });
    let vocab = Vocabulary::bundled();
    assert!(matches!(
        forge_with_backend(ScenarioKind::Bias, &json!({}), &mock, &vocab),
        Err(Error::ForgeParse(_))
    ));
    assert!(matches!(
        forge_with_backend(ScenarioKind::Bias, &json!([1]), &mock, &vocab),
        Err(Error::Precondition(_))
    ));
    let incomplete = default_reply(json!({"case_id": "b1"}));
    assert!(matches!(
        forge_with_backend(ScenarioKind::Bias, &json!({}), &incomplete, &vocab),
        Err(Error::ForgeParse(_))
    ));
}

#[test]
fn bias_case_validation() {
    let vocab = Vocabulary::bundled();
    let case = all_scenarios()
        .into_iter()
        .find_map(|s| match s {
            Scenario::Bias(b) => Some(b),
            _ => None,
        })
        .unwrap();
    case.validate(&vocab).unwrap();
    let mut empty = case.clone();
    empty.stage2_red_flag = " ".into();
    assert!(matches!(empty.validate(&vocab), Err(Error::Precondition(_))));
    let mut same = case.clone();
    same.anchor_diagnosis = same.correct_diagnosis.clone();
    assert!(matches!(same.validate(&vocab), Err(Error::Validation(_))));
}

#[test]
fn every_fixture_scenario_validates() {
    let vocab = Vocabulary::bundled();
    let all = all_scenarios();
    assert_eq!(all.len(), 12);
    for s in &all {
        s.validate(&vocab).unwrap();
    }
}
