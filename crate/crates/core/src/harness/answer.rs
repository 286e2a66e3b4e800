use std::collections::BTreeSet;

use serde_json::Value;

use super::transcript::{ExtractionMethod, FinalAnswer, GeoAnswer};
use crate::vocab::Vocabulary;

pub const FINAL_MARKER: &str = "FINAL:";

/// Byte offset just past the `FINAL:` marker, case-insensitive.
pub fn final_marker_end(text: &str) -> Option<usize> {
    text.to_ascii_uppercase().find(FINAL_MARKER).map(|i| i + FINAL_MARKER.len())
}

fn find_ci(hay: &str, needle: &str) -> Option<usize> {
    hay.to_ascii_lowercase().find(needle)
}

fn strip_label(s: &str) -> &str {
    let lower = s.to_ascii_lowercase();
    for label in ["working diagnosis:", "differential diagnosis:", "differential:", "diagnoses:", "diagnosis:"] {
        if let Some(i) = lower.find(label) {
            if lower[..i].trim().is_empty() {
                return &s[i + label.len()..];
            }
        }
    }
    s
}

fn strip_rank(s: &str) -> &str {
    let t = s.trim_start_matches(|c: char| c == '-' || c == '*' || c.is_whitespace());
    let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        if let Some(rest) = t[digits..].strip_prefix(['.', ')']) {
            return rest;
        }
    }
    t
}

/// Split a diagnosis segment into ranked labels. Items separate on `;`,
/// newlines and numbered markers (`1.`, `2)`).
pub fn split_diagnoses(segment: &str) -> Vec<String> {
    let mut parts: Vec<String> = Vec::new();
    for line in segment.split(['\n', ';']) {
        let mut cur = String::new();
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let at_marker = chars[i].is_ascii_digit()
                && (i == 0 || chars[i - 1].is_whitespace())
                && chars.get(i + 1).is_some_and(|c| *c == '.' || *c == ')')
                && chars.get(i + 2).is_none_or(|c| c.is_whitespace());
            if at_marker && !cur.trim().is_empty() {
                parts.push(std::mem::take(&mut cur));
            }
            cur.push(chars[i]);
            i += 1;
        }
        parts.push(cur);
    }
    parts
        .iter()
        .map(|p| strip_rank(p).trim().trim_end_matches(['.', ',']).trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn structured_answer(v: &Value) -> Option<(Vec<String>, String)> {
    let list = v.get("diagnoses").or_else(|| v.get("differential"))?.as_array()?;
    let diagnoses = list.iter().filter_map(|d| d.as_str().map(String::from)).collect();
    let plan = v.get("plan").and_then(Value::as_str).unwrap_or_default().to_string();
    Some((diagnoses, plan))
}

/// Read a diagnosis list and plan from a reply. A structured payload with
/// `diagnoses` wins; otherwise text after `FINAL:` (or the whole reply) is
/// split at `Plan:` into the differential and the plan. Without a `Plan:`
/// label the whole body doubles as the plan.
pub fn parse_final_answer(text: &str, structured: Option<&Value>) -> FinalAnswer {
    let marked = final_marker_end(text);
    if let Some((diagnoses, plan)) = structured.and_then(structured_answer) {
        return FinalAnswer {
            diagnoses,
            plan,
            structured: structured.cloned(),
            unmarked: marked.is_none(),
        };
    }
    let body = marked.map_or(text, |i| &text[i..]).trim();
    let (dx, plan) = match find_ci(body, "plan:") {
        Some(i) => (&body[..i], body[i + 5..].trim()),
        None => (body, body),
    };
    FinalAnswer {
        diagnoses: split_diagnoses(strip_label(dx)),
        plan: plan.to_string(),
        structured: structured.cloned(),
        unmarked: marked.is_none(),
    }
}

fn canonical(vocab: &Vocabulary, label: &str) -> String {
    vocab.lookup(label).map_or_else(|| label.trim().to_string(), |c| c.label.clone())
}

/// Structured `{antigens, formulation, counselling}` payload if present and
/// well-formed; otherwise vocabulary extraction from the prose.
pub fn parse_geo_answer(locale: &str, text: &str, structured: Option<&Value>, vocab: &Vocabulary) -> GeoAnswer {
    let payload = structured
        .cloned()
        .or_else(|| super::adapter::extract_json(text))
        .filter(|v| v.get("antigens").is_some_and(Value::is_array));
    if let Some(v) = payload {
        let antigens: BTreeSet<String> = v["antigens"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(Value::as_str)
            .map(|a| canonical(vocab, a))
            .collect();
        let str_field = |k: &str| v.get(k).and_then(Value::as_str).unwrap_or_default().to_string();
        return GeoAnswer {
            locale: locale.into(),
            antigens,
            formulation: canonical(vocab, &str_field("formulation")),
            counselling: str_field("counselling"),
            method: ExtractionMethod::Structured,
        };
    }
    GeoAnswer {
        locale: locale.into(),
        antigens: vocab.extract(text, Some("antigen")).into_iter().collect(),
        formulation: vocab
            .extract(text, Some("formulation"))
            .into_iter()
            .next()
            .unwrap_or_default(),
        counselling: text.to_string(),
        method: ExtractionMethod::Extracted,
    }
}
