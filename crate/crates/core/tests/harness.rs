mod common;

use common::{all_scenarios, fixture, reverse_fixture};
use guidebench::harness::{
    match_query_to_nodes, read_transcript, run_bias_session, run_decision_session, run_geo_query,
    run_reverse_session, transcript_from_jsonl, transcript_to_jsonl, write_transcript, ExtractionMethod,
    LogicalClock, MockScript, Role, ScriptedMock, ScriptedReply, SessionContext, Termination, TRANSPORT_ERROR_REPLY,
};
use guidebench::retrieval::HashEmbedder;
use guidebench::scenario::{BiasCase, DecisionVignette, GeoPair, Scenario};
use guidebench::vocab::Vocabulary;
use guidebench::Error;
use serde_json::json;

fn script() -> ScriptedMock {
    ScriptedMock::load(&fixture("mock/evaluate_script.json")).unwrap()
}

fn vignette(id: &str) -> DecisionVignette {
    all_scenarios()
        .into_iter()
        .find_map(|s| match s {
            Scenario::Decision(v) if v.vignette_id == id => Some(v),
            _ => None,
        })
        .unwrap()
}

fn bias(id: &str) -> BiasCase {
    all_scenarios()
        .into_iter()
        .find_map(|s| match s {
            Scenario::Bias(b) if b.case_id == id => Some(b),
            _ => None,
        })
        .unwrap()
}

fn geo() -> GeoPair {
    all_scenarios()
        .into_iter()
        .find_map(|s| match s {
            Scenario::Geo(g) => Some(g),
            _ => None,
        })
        .unwrap()
}

macro_rules! cx {
    ($model:expr, $vocab:ident, $clock:ident) => {
        SessionContext::new($model, &HashEmbedder, &$vocab, &$clock)
    };
}

#[test]
fn decision_session_outcomes() {
    let (vocab, clock, mock) = (Vocabulary::bundled(), LogicalClock::default(), script());
    let cx = cx!(&mock, vocab, clock);

    let t = run_decision_session(&vignette("dec-perfect"), &cx).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert_eq!(t.matched_node_ids(), ["rr", "indrawing", "spo2", "vacc"]);
    assert!(t.turns.iter().any(|x| x.role == Role::Harness && x.text.contains("56 breaths")));

    let t = run_decision_session(&vignette("dec-immediate"), &cx).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert_eq!(t.model_turns().count(), 1);
    assert!(t.matched_node_ids().is_empty());

    let t = run_decision_session(&vignette("dec-never"), &cx).unwrap();
    assert_eq!(t.termination, Termination::MaxTurns);
    assert_eq!(t.model_turns().count(), 4);
    assert!(t.final_answer.as_ref().unwrap().unmarked);
}

#[test]
fn unmatched_query_gets_no_information() {
    let (vocab, clock, mock) = (Vocabulary::bundled(), LogicalClock::default(), script());
    let t = run_decision_session(&vignette("dec-partial"), &cx!(&mock, vocab, clock)).unwrap();
    let travel = t.turns.iter().position(|x| x.text.contains("travelled")).unwrap();
    assert!(t.turns[travel].matched_node_ids.is_empty());
    assert!(t.turns[travel + 1].text.to_lowercase().contains("no additional information"));
}

#[test]
fn node_ids_appear_once() {
    let (vocab, clock) = (Vocabulary::bundled(), LogicalClock::default());
    let mock = ScriptedMock::single(
        "decision:dec-perfect",
        &["What is her breathing rate?", "And the respiratory rate again?", "FINAL: Diagnosis: pneumonia."],
    );
    let t = run_decision_session(&vignette("dec-perfect"), &cx!(&mock, vocab, clock)).unwrap();
    assert_eq!(t.matched_node_ids(), ["rr"]);
}

#[test]
fn matching_examples() {
    let nodes = vignette("dec-perfect").hidden_nodes;
    let m = |q: &str| match_query_to_nodes(q, &nodes, &HashEmbedder, 0.75).unwrap();
    assert_eq!(m("What is the respiratory rate?"), ["rr"]);
    assert!(m("Does the family own a bicycle?").is_empty());
    let both = m("What are the breathing rate and oxygen saturation?");
    assert!(both.contains(&"rr".to_string()) && both.contains(&"spo2".to_string()));
}

#[test]
fn long_query_is_truncated_before_matching() {
    let (vocab, clock) = (Vocabulary::bundled(), LogicalClock::default());
    let mut v = vignette("dec-perfect");
    v.query_token_cap = 5;
    let long = "Could you please tell me everything you know, and then her oxygen saturation?";
    let mock = ScriptedMock::single("decision:dec-perfect", &[long, "FINAL: Diagnosis: pneumonia."]);
    let t = run_decision_session(&v, &cx!(&mock, vocab, clock)).unwrap();
    let q = t.model_turns().next().unwrap();
    assert!(q.truncated);
    assert!(q.matched_node_ids.is_empty());
}

#[test]
fn transport_error_keeps_partial_transcript() {
    let (vocab, clock) = (Vocabulary::bundled(), LogicalClock::default());
    let mock = ScriptedMock::single("decision:dec-perfect", &["What is her breathing rate?", TRANSPORT_ERROR_REPLY]);
    let t = run_decision_session(&vignette("dec-perfect"), &cx!(&mock, vocab, clock)).unwrap();
    assert_eq!(t.termination, Termination::ModelError);
    assert_eq!(t.model_turns().count(), 1);
    assert_eq!(t.matched_node_ids(), ["rr"]);
}

#[test]
fn sessions_are_byte_stable() {
    let vocab = Vocabulary::bundled();
    let mock = script();
    let run = || {
        let clock = LogicalClock::default();
        transcript_to_jsonl(&run_decision_session(&vignette("dec-partial"), &cx!(&mock, vocab, clock)).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn reverse_session_flags_contradiction() {
    let (vocab, clock, mock) = (Vocabulary::bundled(), LogicalClock::default(), script());
    let (persona, questions) = reverse_fixture();
    let t = run_reverse_session(&persona, &questions, &cx!(&mock, vocab, clock)).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    let flagged: Vec<usize> = t
        .model_turns()
        .enumerate()
        .filter(|(_, x)| x.contradiction.is_some())
        .map(|(i, _)| i + 1)
        .collect();
    assert_eq!(flagged, [8]);
    let covered: std::collections::BTreeSet<&str> = t
        .model_turns()
        .flat_map(|x| x.disclosed_fact_ids.iter().map(String::as_str))
        .collect();
    assert_eq!(covered.len(), persona.facts.len());
}

#[test]
fn reverse_script_length_precondition() {
    let (vocab, clock, mock) = (Vocabulary::bundled(), LogicalClock::default(), script());
    let (persona, questions) = reverse_fixture();
    let cx = cx!(&mock, vocab, clock);
    assert!(matches!(run_reverse_session(&persona, &[], &cx), Err(Error::Precondition(_))));
    assert!(matches!(
        run_reverse_session(&persona, &questions[..5], &cx),
        Err(Error::Precondition(_))
    ));
    let eleven: Vec<_> = questions.iter().cycle().take(11).cloned().collect();
    assert!(matches!(run_reverse_session(&persona, &eleven, &cx), Err(Error::Precondition(_))));
}

#[test]
fn bias_session_has_two_stages() {
    let (vocab, clock, mock) = (Vocabulary::bundled(), LogicalClock::default(), script());
    let cx = cx!(&mock, vocab, clock);
    let t = run_bias_session(&bias("bias-heartburn-acs"), &cx).unwrap();
    assert_eq!(t.model_turns().count(), 2);
    let [s1, s2] = t.stage_answers.as_slice() else { panic!("two stages") };
    assert_ne!(s1.diagnoses[0], s2.diagnoses[0]);
    assert!(vocab.mentions(&s2.diagnoses[0], "acute coronary syndrome"));

    let stubborn = ScriptedMock::single("bias:bias-heartburn-acs", &["Diagnosis: gastro-oesophageal reflux. Plan: antacids."]);
    let t = run_bias_session(&bias("bias-heartburn-acs"), &cx!(&stubborn, vocab, clock)).unwrap();
    assert_eq!(t.stage_answers[0].diagnoses, t.stage_answers[1].diagnoses);

    let mut empty = bias("bias-heartburn-acs");
    empty.stage2_red_flag.clear();
    assert!(matches!(run_bias_session(&empty, &cx), Err(Error::Precondition(_))));
}

fn geo_with(reply_a: ScriptedReply) -> ScriptedMock {
    let pair = geo();
    let mut s = MockScript::default();
    s.sessions.insert(format!("geo:{}:a", pair.pair_id), vec![reply_a]);
    s.sessions.insert(format!("geo:{}:b", pair.pair_id), vec![ScriptedReply::Text("Nothing today.".into())]);
    ScriptedMock::new(s)
}

#[test]
fn geo_answer_extraction() {
    let (vocab, clock) = (Vocabulary::bundled(), LogicalClock::default());
    let structured = geo_with(ScriptedReply::Structured {
        text: "see payload".into(),
        structured: json!({"antigens": ["Pentavalent", "PCV10", "OPV"], "formulation": "Pentavalent", "counselling": "KEPI"}),
    });
    let t = run_geo_query(&geo(), &cx!(&structured, vocab, clock)).unwrap();
    let a = &t.geo_answers[0];
    assert_eq!(a.method, ExtractionMethod::Structured);
    assert_eq!(a.antigens.len(), 3);

    let prose = geo_with(ScriptedReply::Text("Give the five-in-one and pneumococcal and polio drops.".into()));
    let t = run_geo_query(&geo(), &cx!(&prose, vocab, clock)).unwrap();
    let a = &t.geo_answers[0];
    assert_eq!(a.method, ExtractionMethod::Extracted);
    let labels: Vec<&str> = a.antigens.iter().map(String::as_str).collect();
    assert_eq!(labels, ["OPV", "PCV10", "Pentavalent"]);

    assert!(t.geo_answers[1].antigens.is_empty());
}

#[test]
fn transcript_jsonl_round_trip() {
    let (vocab, clock, mock) = (Vocabulary::bundled(), LogicalClock::default(), script());
    let cx = cx!(&mock, vocab, clock);
    let (persona, questions) = reverse_fixture();
    let dir = tempfile::tempdir().unwrap();
    let ts = [
        run_decision_session(&vignette("dec-partial"), &cx).unwrap(),
        run_reverse_session(&persona, &questions, &cx).unwrap(),
        run_bias_session(&bias("bias-outbreak-dka"), &cx).unwrap(),
        run_geo_query(&geo(), &cx).unwrap(),
    ];
    for (i, t) in ts.iter().enumerate() {
        let body = transcript_to_jsonl(t);
        assert_eq!(&transcript_from_jsonl(body.as_bytes(), "mem").unwrap(), t);
        let path = dir.path().join(format!("t{i}.jsonl"));
        write_transcript(&path, t).unwrap();
        assert_eq!(&read_transcript(&path).unwrap(), t);
    }
}
