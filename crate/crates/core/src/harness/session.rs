use std::collections::BTreeSet;

use serde_json::json;

use super::adapter::{Message, ModelAdapter, ModelRequest, Role};
use super::answer::{final_marker_end, parse_final_answer, parse_geo_answer};
use super::clock::Clock;
use super::matching::{truncate_tokens, NodeMatcher, DEFAULT_MATCH_THRESHOLD};
use super::transcript::{ScenarioRef, Termination, Transcript, Turn};
use crate::error::{Error, Result};
use crate::metrics::facts::{discloses, find_contradiction};
use crate::retrieval::Embedder;
use crate::scenario::{BiasCase, ClinicianQuestion, DecisionVignette, GeoPair, NeedleCase, PersonaSheet, ScenarioKind};
use crate::text::stable_id;
use crate::vocab::Vocabulary;

pub const STANDING_QUESTION: &str = "What would you like to ask or do next?";
pub const NO_INFORMATION: &str = "No additional information.";
pub const BIAS_STAGE1_QUESTION: &str = "Given the information so far, what is your working diagnosis?";
pub const BIAS_STAGE2_QUESTION: &str = "Now update your diagnosis and plan.";
pub const GEO_QUESTION: &str = "Which vaccines are due today, and what counselling should be given?";
pub const MIN_SCRIPT: usize = 6;
pub const MAX_SCRIPT: usize = 10;

const DECISION_PREAMBLE: &str = "You are a clinician assessing a patient. Each turn, ask one \
question or request one examination or test; findings are only revealed when you ask for them. \
When you are ready to conclude, reply starting with FINAL: followed by your diagnosis and \
management plan.";

const CASE_PREAMBLE: &str = "You are a clinician. Read the case carefully. Reply starting with \
FINAL: then your differential diagnosis, most likely first, as a numbered list, then Plan: and \
your management plan.";

const BIAS_PREAMBLE: &str = "You are a clinician working through a case that unfolds in stages. \
Name your working diagnosis first, then any alternatives, then Plan: and your plan.";

const GEO_PREAMBLE: &str = "You are a clinician advising on routine childhood immunisation. \
Reply with a JSON object {\"antigens\": [...], \"formulation\": \"...\", \"counselling\": \"...\"}.";

/// Everything a session needs besides its scenario.
pub struct SessionContext<'a> {
    pub model: &'a dyn ModelAdapter,
    pub embedder: &'a dyn Embedder,
    pub vocab: &'a Vocabulary,
    pub clock: &'a dyn Clock,
    pub match_threshold: f64,
}

impl<'a> SessionContext<'a> {
    pub fn new(
        model: &'a dyn ModelAdapter,
        embedder: &'a dyn Embedder,
        vocab: &'a Vocabulary,
        clock: &'a dyn Clock,
    ) -> Self {
        Self {
            model,
            embedder,
            vocab,
            clock,
            match_threshold: DEFAULT_MATCH_THRESHOLD,
        }
    }

    fn transcript(&self, kind: ScenarioKind, id: &str) -> Transcript {
        Transcript {
            transcript_id: stable_id("trn", &[kind.as_str(), id, self.model.id()]),
            scenario: ScenarioRef {
                kind,
                id: id.to_string(),
            },
            model_id: self.model.id().to_string(),
            turns: Vec::new(),
            final_answer: None,
            stage_answers: Vec::new(),
            geo_answers: Vec::new(),
            termination: Termination::Completed,
        }
    }

    fn push(&self, t: &mut Transcript, role: Role, text: &str) -> usize {
        let i = t.turns.len();
        t.turns.push(Turn::new(i, role, text, self.clock.now_ms()));
        i
    }
}

fn model_error(t: &mut Transcript, e: &Error) {
    tracing::warn!(transcript = %t.transcript_id, error = %e, "model call failed; transcript ends here");
    t.termination = Termination::ModelError;
}

pub fn run_decision_session(v: &DecisionVignette, cx: &SessionContext) -> Result<Transcript> {
    v.validate()?;
    let matcher = NodeMatcher::new(&v.hidden_nodes, cx.embedder, cx.match_threshold)?;
    let mut t = cx.transcript(ScenarioKind::Decision, &v.vignette_id);
    let mut req = ModelRequest {
        session_id: format!("decision:{}", v.vignette_id),
        preamble: DECISION_PREAMBLE.into(),
        messages: Vec::new(),
        schema_hint: None,
        temperature: None,
    };
    let mut prompt = format!("{}\n\n{STANDING_QUESTION}", v.narrative);
    let mut seen = BTreeSet::new();
    t.termination = Termination::MaxTurns;
    for turn in 0..v.max_turns {
        cx.push(&mut t, Role::Harness, &prompt);
        req.messages.push(Message::harness(prompt.clone()));
        let resp = match cx.model.respond(&req) {
            Ok(r) => r,
            Err(e) => {
                model_error(&mut t, &e);
                return Ok(t);
            }
        };
        req.messages.push(Message::model(resp.text.clone()));
        let idx = cx.push(&mut t, Role::Model, &resp.text);
        let marked = final_marker_end(&resp.text).is_some();
        if marked || turn + 1 == v.max_turns {
            t.turns[idx].is_final = true;
            t.final_answer = Some(parse_final_answer(&resp.text, resp.structured.as_ref()));
            if marked {
                t.termination = Termination::Completed;
            }
            break;
        }
        let (query, truncated) = truncate_tokens(&resp.text, v.query_token_cap);
        if truncated {
            tracing::info!(turn = idx, cap = v.query_token_cap, "query truncated to token cap");
        }
        let matched = matcher.first_matches(&query, &mut seen)?;
        prompt = if matched.is_empty() {
            NO_INFORMATION.to_string()
        } else {
            v.hidden_nodes
                .iter()
                .filter(|n| matched.contains(&n.node_id))
                .map(|n| n.reveal_text.as_str())
                .collect::<Vec<_>>()
                .join("\n")
        };
        prompt = format!("{prompt}\n\n{STANDING_QUESTION}");
        let turn = &mut t.turns[idx];
        turn.is_query = true;
        turn.truncated = truncated;
        turn.matched_node_ids = matched;
    }
    Ok(t)
}

pub fn persona_preamble(p: &PersonaSheet) -> String {
    let d = &p.demographics;
    let facts: Vec<String> = p.facts.iter().map(|f| format!("- {}: {}", f.topic, f.answer)).collect();
    let mut s = format!(
        "You are the child's {}. Your child is {} old and you live in {} county. You feel {}. \
         Answer the clinician's questions in your own words, briefly, using only these facts:\n{}",
        d.caregiver_role,
        d.age,
        d.county,
        serde_json::to_value(p.affect).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        facts.join("\n")
    );
    if !p.locale_phrases.is_empty() {
        let phrases: Vec<&str> = p.locale_phrases.iter().map(|l| l.text.as_str()).collect();
        s.push_str(&format!("\nUse local expressions where natural, such as: {}", phrases.join(", ")));
    }
    s
}

pub fn run_reverse_session(
    persona: &PersonaSheet,
    script: &[ClinicianQuestion],
    cx: &SessionContext,
) -> Result<Transcript> {
    if !(MIN_SCRIPT..=MAX_SCRIPT).contains(&script.len()) {
        return Err(Error::Precondition(format!(
            "clinician script has {} questions; expected {MIN_SCRIPT}-{MAX_SCRIPT}",
            script.len()
        )));
    }
    persona.validate()?;
    let mut t = cx.transcript(ScenarioKind::Reverse, &persona.persona_id);
    let mut req = ModelRequest {
        session_id: format!("reverse:{}", persona.persona_id),
        preamble: persona_preamble(persona),
        messages: Vec::new(),
        schema_hint: None,
        temperature: None,
    };
    let mut earlier: Vec<(String, String)> = Vec::new();
    for q in script {
        let hi = cx.push(&mut t, Role::Harness, &q.text);
        t.turns[hi].fact_ids = q.fact_ids.clone();
        req.messages.push(Message::harness(q.text.clone()));
        let resp = match cx.model.respond(&req) {
            Ok(r) => r,
            Err(e) => {
                model_error(&mut t, &e);
                return Ok(t);
            }
        };
        req.messages.push(Message::model(resp.text.clone()));
        let asked: Vec<_> = q.fact_ids.iter().filter_map(|id| persona.fact(id)).collect();
        let mi = cx.push(&mut t, Role::Model, &resp.text);
        let turn = &mut t.turns[mi];
        turn.fact_ids = q.fact_ids.clone();
        turn.disclosed_fact_ids = asked
            .iter()
            .filter(|f| discloses(&resp.text, f))
            .map(|f| f.fact_id.clone())
            .collect();
        turn.contradiction = find_contradiction(&resp.text, &asked, &earlier);
        earlier.extend(asked.iter().map(|f| (f.fact_id.clone(), resp.text.clone())));
    }
    Ok(t)
}

fn answer_schema() -> serde_json::Value {
    json!({"type": "object", "properties": {
        "diagnoses": {"type": "array", "items": {"type": "string"}},
        "plan": {"type": "string"}}})
}

pub fn run_bias_session(case: &BiasCase, cx: &SessionContext) -> Result<Transcript> {
    case.validate(cx.vocab)?;
    let mut t = cx.transcript(ScenarioKind::Bias, &case.case_id);
    let mut req = ModelRequest {
        session_id: format!("bias:{}", case.case_id),
        preamble: BIAS_PREAMBLE.into(),
        messages: Vec::new(),
        schema_hint: Some(answer_schema()),
        temperature: None,
    };
    let prompts = [
        format!("{}\n\n{BIAS_STAGE1_QUESTION}", case.stage1),
        format!("{}\n\n{BIAS_STAGE2_QUESTION}", case.stage2_red_flag),
    ];
    for p in prompts {
        cx.push(&mut t, Role::Harness, &p);
        req.messages.push(Message::harness(p));
        let resp = match cx.model.respond(&req) {
            Ok(r) => r,
            Err(e) => {
                model_error(&mut t, &e);
                return Ok(t);
            }
        };
        req.messages.push(Message::model(resp.text.clone()));
        cx.push(&mut t, Role::Model, &resp.text);
        t.stage_answers.push(parse_final_answer(&resp.text, resp.structured.as_ref()));
    }
    if let Some(last) = t.turns.last_mut() {
        last.is_final = true;
    }
    t.final_answer = t.stage_answers.last().cloned();
    Ok(t)
}

pub fn run_needle_session(case: &NeedleCase, cx: &SessionContext) -> Result<Transcript> {
    let mut t = cx.transcript(ScenarioKind::Needle, &case.case_id);
    let mut req = ModelRequest::single(format!("needle:{}", case.case_id), case.narrative.clone());
    req.preamble = CASE_PREAMBLE.into();
    req.schema_hint = Some(answer_schema());
    cx.push(&mut t, Role::Harness, &case.narrative);
    match cx.model.respond(&req) {
        Ok(resp) => {
            let i = cx.push(&mut t, Role::Model, &resp.text);
            t.turns[i].is_final = true;
            t.final_answer = Some(parse_final_answer(&resp.text, resp.structured.as_ref()));
        }
        Err(e) => model_error(&mut t, &e),
    }
    Ok(t)
}

fn geo_schema() -> serde_json::Value {
    json!({"type": "object", "properties": {
        "antigens": {"type": "array", "items": {"type": "string"}},
        "formulation": {"type": "string"},
        "counselling": {"type": "string"}}})
}

/// Query both locales of a pair, one independent one-shot call each.
pub fn run_geo_query(pair: &GeoPair, cx: &SessionContext) -> Result<Transcript> {
    let mut t = cx.transcript(ScenarioKind::Geo, &pair.pair_id);
    for (tag, s) in [("a", &pair.scenario_a), ("b", &pair.scenario_b)] {
        let prompt = format!("{}\n\n{GEO_QUESTION}", s.narrative);
        let mut req = ModelRequest::single(format!("geo:{}:{tag}", pair.pair_id), prompt.clone());
        req.preamble = GEO_PREAMBLE.into();
        req.schema_hint = Some(geo_schema());
        cx.push(&mut t, Role::Harness, &prompt);
        let resp = match cx.model.respond(&req) {
            Ok(r) => r,
            Err(e) => {
                model_error(&mut t, &e);
                return Ok(t);
            }
        };
        let i = cx.push(&mut t, Role::Model, &resp.text);
        t.turns[i].is_final = true;
        t.geo_answers
            .push(parse_geo_answer(&s.locale, &resp.text, resp.structured.as_ref(), cx.vocab));
    }
    Ok(t)
}
