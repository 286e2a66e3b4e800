//! Drafting scenarios through a generation backend.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::harness::{extract_json, ModelAdapter, ModelRequest};
use crate::text::stable_id;
use crate::vocab::Vocabulary;

use super::types::{Scenario, ScenarioKind};

fn field_guide(kind: ScenarioKind) -> Value {
    match kind {
        ScenarioKind::Decision => json!({
            "vignette_id": "string",
            "narrative": "opening narrative, string",
            "hidden_nodes": [{"node_id": "string", "label": "string", "synonyms": ["string"],
                              "patterns": ["regex"], "reveal_text": "string", "critical": true}],
            "answer_key": {"diagnosis": "string", "management": "string"}
        }),
        ScenarioKind::Needle => json!({
            "case_id": "string",
            "narrative": "300-500 words containing the clue exactly once",
            "needle": {"clue_text": "string", "patterns": ["regex"], "implication_terms": ["string"]},
            "target_disease": "string",
            "distractor_diagnoses": ["at least three strings"],
            "management_key": {"text": "string", "required_elements": ["string"]},
            "locale": "string"
        }),
        ScenarioKind::Reverse => json!({
            "persona": {
                "persona_id": "string",
                "facts": [{"fact_id": "string", "topic": "string", "answer": "string"}],
                "demographics": {"age": "string", "caregiver_role": "string", "county": "string"},
                "affect": "worried | hesitant | relieved",
                "locale_phrases": [{"text": "string", "variants": ["string"], "topic": "fact_id"}]
            },
            "script": [{"text": "clinician question", "fact_ids": ["string"]}]
        }),
        ScenarioKind::Geo => json!({
            "pair_id": "string",
            "scenario_a": {"locale": "string", "setting_tier": "string", "narrative": "string",
                           "answer_key": {"required_antigens": ["string"], "formulation": "string",
                                          "resource_constraints": [], "locale_factors": ["string"]}},
            "scenario_b": "same shape as scenario_a"
        }),
        ScenarioKind::Bias => json!({
            "case_id": "string",
            "bias_type": "anchoring | confirmation | premature_closure | availability",
            "stage1": "string",
            "anchor_diagnosis": "string",
            "stage2_red_flag": "string absent from stage1",
            "red_flag_terms": ["string"],
            "correct_diagnosis": "string",
            "confirmatory_actions": ["string"],
            "reasoning_chain": ["string"],
            "expected_differential": ["string"],
            "expected_count": 3
        }),
    }
}

/// Seed values win over backend values; objects merge key by key.
fn overlay(base: &mut Value, seed: &Value) {
    match (base, seed) {
        (Value::Object(b), Value::Object(s)) => {
            for (k, v) in s {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => overlay(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, s) => *b = s.clone(),
    }
}

pub fn forge_prompt(kind: ScenarioKind, seed: &Value) -> String {
    format!(
        "Draft one {kind} evaluation scenario for a clinical benchmark.\n\
         Reply with a single JSON object using exactly these fields:\n{}\n\
         Keep every value supplied in the seed unchanged:\n{}\n",
        serde_json::to_string_pretty(&field_guide(kind)).unwrap_or_default(),
        serde_json::to_string_pretty(seed).unwrap_or_default()
    )
}

/// Ask `backend` for a draft of `kind`, parse it against the kind's schema
/// and overlay the seed. Drafts still need their kind's audit.
pub fn forge_with_backend(
    kind: ScenarioKind,
    seed: &Value,
    backend: &dyn ModelAdapter,
    vocab: &Vocabulary,
) -> Result<Scenario> {
    if !seed.is_object() {
        return Err(Error::Precondition("forge seed must be a JSON object".into()));
    }
    let seed_text = serde_json::to_string(seed).unwrap_or_default();
    let mut req = ModelRequest::single(
        format!("forge:{kind}:{}", stable_id("seed", &[&seed_text])),
        forge_prompt(kind, seed),
    );
    req.schema_hint = Some(field_guide(kind));
    let resp = backend.respond(&req)?;
    let mut draft = resp
        .structured
        .filter(Value::is_object)
        .or_else(|| extract_json(&resp.text))
        .ok_or_else(|| Error::ForgeParse(format!("{kind}: backend reply is not a JSON object")))?;
    overlay(&mut draft, seed);
    let mut obj: Map<String, Value> = match draft {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    obj.insert("kind".into(), Value::String(kind.as_str().into()));
    let scenario: Scenario = serde_json::from_value(Value::Object(obj))
        .map_err(|e| Error::ForgeParse(format!("{kind}: {e}")))?;
    scenario
        .validate(vocab)
        .map_err(|e| Error::ForgeParse(format!("{kind}: {e}")))?;
    Ok(scenario)
}
