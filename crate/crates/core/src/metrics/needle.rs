use regex::RegexBuilder;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::{embedding_text, Transcript};
use crate::retrieval::{cosine, Embedder};
use crate::scenario::{Needle, NeedleCase};
use crate::text::{contains_token_seq, matches_term, sentences, tokens};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeedleResult {
    pub clue_detected: bool,
    pub correct_diagnosis: bool,
    pub score: f64,
}

impl NeedleResult {
    pub fn from_flags(clue_detected: bool, correct_diagnosis: bool) -> Self {
        let score = match (clue_detected, correct_diagnosis) {
            (true, true) => 1.0,
            (false, false) => 0.0,
            _ => 0.5,
        };
        Self {
            clue_detected,
            correct_diagnosis,
            score,
        }
    }
}

/// True if `text` references `reference` by regex, term spec, verbatim
/// token sequence, or a sentence whose embedding is within `threshold`.
pub fn references(
    text: &str,
    reference: &str,
    patterns: &[String],
    terms: &[String],
    embedder: &dyn Embedder,
    threshold: f64,
) -> Result<bool> {
    for p in patterns {
        // Patterns are validated on load; an invalid one simply never matches.
        if let Ok(re) = RegexBuilder::new(p).case_insensitive(true).build() {
            if re.is_match(text) {
                return Ok(true);
            }
        }
    }
    let toks = tokens(text);
    if terms.iter().any(|t| matches_term(&toks, t)) || contains_token_seq(&toks, &tokens(reference)) {
        return Ok(true);
    }
    let ref_text = embedding_text(reference);
    if ref_text.is_empty() {
        return Ok(false);
    }
    let ref_vec = embedder.embed(&ref_text)?;
    for s in sentences(text) {
        let st = embedding_text(s);
        if !st.is_empty() && cosine(&embedder.embed(&st)?, &ref_vec) >= threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn detect_clue(response: &str, needle: &Needle, embedder: &dyn Embedder, threshold: f64) -> Result<bool> {
    references(
        response,
        &needle.clue_text,
        &needle.patterns,
        &needle.implication_terms,
        embedder,
        threshold,
    )
}

pub fn score_needle(
    t: &Transcript,
    case: &NeedleCase,
    vocab: &Vocabulary,
    embedder: &dyn Embedder,
    threshold: f64,
    top_k: usize,
) -> Result<NeedleResult> {
    let clue = detect_clue(&t.model_text(), &case.needle, embedder, threshold)?;
    let correct = t.final_answer.as_ref().is_some_and(|a| {
        let in_top = a
            .diagnoses
            .iter()
            .take(top_k)
            .any(|d| vocab.mentions(d, &case.target_disease));
        let plan = tokens(&a.plan);
        in_top
            && case
                .management_key
                .required_elements
                .iter()
                .all(|e| matches_term(&plan, e))
    });
    Ok(NeedleResult::from_flags(clue, correct))
}
