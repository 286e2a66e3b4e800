//! Rule-based fact disclosure and contradiction detection for simulated
//! caregiver answers.
//!
//! Limits: only negation polarity and bare numbers are compared, so a
//! reworded contradiction without either ("a little" vs "a lot") goes
//! unnoticed, and a negated clause about a different subject can raise a
//! false alarm.

use std::collections::BTreeSet;

use crate::scenario::FactItem;
use crate::text::{content_tokens, matches_term, tokens};

const NEGATIONS: [&str; 16] = [
    "cannot", "didn", "doesn", "don", "hakuna", "hapana", "hasn", "haven", "isn", "never", "no",
    "none", "not", "nothing", "wasn", "without",
];

pub fn is_negated(text: &str) -> bool {
    tokens(text).iter().any(|t| NEGATIONS.contains(&t.as_str()))
}

pub fn numbers(text: &str) -> BTreeSet<String> {
    tokens(text)
        .into_iter()
        .filter(|t| t.chars().all(|c| c.is_ascii_digit()))
        .collect()
}

fn fact_terms(fact: &FactItem) -> Vec<String> {
    if fact.keywords.is_empty() {
        content_tokens(&fact.answer)
            .into_iter()
            .filter(|t| !NEGATIONS.contains(&t.as_str()))
            .collect()
    } else {
        fact.keywords.clone()
    }
}

/// Explicit keywords must all appear; otherwise at least half of the
/// truthful answer's content tokens must.
pub fn discloses(answer: &str, fact: &FactItem) -> bool {
    let toks = tokens(answer);
    if !fact.keywords.is_empty() {
        return fact.keywords.iter().all(|k| matches_term(&toks, k));
    }
    let terms = fact_terms(fact);
    if terms.is_empty() {
        return false;
    }
    let hits = terms.iter().filter(|t| toks.contains(t)).count();
    2 * hits >= terms.len()
}

fn touches(answer: &str, fact: &FactItem) -> bool {
    let toks = tokens(answer);
    fact_terms(fact).iter().any(|k| matches_term(&toks, k))
}

fn conflicts(reference: &str, answer: &str) -> Option<&'static str> {
    let (rn, an) = (numbers(reference), numbers(answer));
    if !rn.is_empty() && !an.is_empty() && rn.is_disjoint(&an) {
        return Some("numeric mismatch");
    }
    if is_negated(reference) != is_negated(answer) {
        return Some("negation mismatch");
    }
    None
}

/// First conflict between `answer` and either the sheet or an earlier
/// answer about the same fact. `earlier` holds (fact_id, answer) pairs.
pub fn find_contradiction(
    answer: &str,
    asked: &[&FactItem],
    earlier: &[(String, String)],
) -> Option<String> {
    for fact in asked {
        if !touches(answer, fact) {
            continue;
        }
        if let Some(why) = conflicts(&fact.answer, answer) {
            return Some(format!("{}: {why} with fact sheet", fact.fact_id));
        }
        for (id, prev) in earlier.iter().filter(|(id, _)| *id == fact.fact_id) {
            if let Some(why) = conflicts(prev, answer) {
                return Some(format!("{id}: {why} with earlier answer"));
            }
        }
    }
    None
}
