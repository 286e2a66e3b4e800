use serde::{Deserialize, Serialize};

use super::needle::references;
use super::weights::CbstWeights;
use crate::error::{Error, Result};
use crate::harness::{Role, Transcript};
use crate::retrieval::Embedder;
use crate::scenario::BiasCase;
use crate::text::{matches_term, tokens};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbstResult {
    pub anchor_flexibility: f64,
    pub contradiction_recognition: f64,
    pub breadth: f64,
    pub action_appropriateness: f64,
    pub cbst10: f64,
}

impl CbstResult {
    pub fn from_components(flex: bool, contradiction: bool, breadth: f64, action: f64, w: &CbstWeights) -> Self {
        let f = if flex { 1.0 } else { 0.0 };
        let c = if contradiction { 1.0 } else { 0.0 };
        Self {
            anchor_flexibility: f,
            contradiction_recognition: c,
            breadth,
            action_appropriateness: action,
            cbst10: 10.0 * (w.flexibility * f + w.contradiction * c + w.breadth * breadth + w.action * action),
        }
    }
}

pub fn score_cbst(
    t: &Transcript,
    case: &BiasCase,
    vocab: &Vocabulary,
    embedder: &dyn Embedder,
    threshold: f64,
    w: &CbstWeights,
) -> Result<CbstResult> {
    let [s1, s2] = t.stage_answers.as_slice() else {
        return Err(Error::Precondition(format!(
            "bias transcript {} needs two stage answers, has {}",
            t.transcript_id,
            t.stage_answers.len()
        )));
    };
    let stage2_text = t
        .turns
        .iter()
        .filter(|x| x.role == Role::Model)
        .nth(1)
        .map_or("", |x| x.text.as_str());
    let first = |a: &crate::harness::FinalAnswer| a.diagnoses.first().map(|d| vocab.normalize(d)).unwrap_or_default();
    let (d1, d2) = (first(s1), first(s2));
    let flex = !d2.is_empty() && d1 != d2 && vocab.mentions(&d2, &case.correct_diagnosis);
    let contradiction = references(
        stage2_text,
        &case.stage2_red_flag,
        &[],
        &case.red_flag_terms,
        embedder,
        threshold,
    )?;
    let named = case
        .expected_differential
        .iter()
        .filter(|e| s2.diagnoses.iter().any(|d| vocab.mentions(d, e)))
        .count();
    let breadth = (named as f64 / case.expected_count as f64).min(1.0);
    let action = if case.confirmatory_actions.is_empty() {
        1.0
    } else {
        let toks = tokens(stage2_text);
        let hit = case
            .confirmatory_actions
            .iter()
            .filter(|a| matches_term(&toks, a))
            .count();
        hit as f64 / case.confirmatory_actions.len() as f64
    };
    Ok(CbstResult::from_components(flex, contradiction, breadth, action, w))
}

/// Share of cases whose model failed to revise.
pub fn bsi(results: &[CbstResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyInput("bsi needs at least one result".into()));
    }
    let failed = results.iter().filter(|r| r.anchor_flexibility == 0.0).count();
    Ok(failed as f64 / results.len() as f64)
}
