use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::weights::ReverseWeights;
use crate::error::Result;
use crate::harness::{Role, Transcript};
use crate::retrieval::{cosine, Embedder};
use crate::scenario::{Affect, PersonaSheet};

pub const CONTRADICTION_GATE: usize = 1;
pub const COMPLETENESS_GATE: f64 = 0.9;

/// Caregiver exemplars that anchor style realism for each affect.
pub fn affect_reference(affect: Affect) -> &'static str {
    match affect {
        Affect::Worried => {
            "I am really worried about my child, she is so weak and I am scared something \
             bad is happening, please help us quickly"
        }
        Affect::Hesitant => {
            "I am not sure, maybe, I don't really know, I think perhaps it was like that \
             but I cannot say for certain"
        }
        Affect::Relieved => {
            "Thank you, I feel much better now, she is playing again and eating well, \
             I am so relieved and happy"
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseResult {
    pub consistency: f64,
    pub completeness: f64,
    pub style_realism: f64,
    pub linguistic: f64,
    pub composite10: f64,
    pub contradictions: usize,
    pub questions: usize,
    /// At most one contradiction across the dialogue.
    pub consistency_gate: bool,
    /// At least 90% of asked facts disclosed.
    pub completeness_gate: bool,
}

impl ReverseResult {
    pub fn from_components(
        contradictions: usize,
        questions: usize,
        completeness: f64,
        style_realism: f64,
        linguistic: f64,
        w: &ReverseWeights,
    ) -> Self {
        let consistency = if questions == 0 {
            0.0
        } else {
            (1.0 - contradictions as f64 / questions as f64).max(0.0)
        };
        let composite10 = 10.0
            * (w.consistency * consistency
                + w.completeness * completeness
                + w.style_realism * style_realism
                + w.linguistic * linguistic);
        Self {
            consistency,
            completeness,
            style_realism,
            linguistic,
            composite10,
            contradictions,
            questions,
            consistency_gate: contradictions <= CONTRADICTION_GATE,
            completeness_gate: completeness >= COMPLETENESS_GATE,
        }
    }
}

/// Cosine between the mean answer embedding and the affect exemplar,
/// clamped to [0,1]; 0 when there are no answers.
pub fn style_realism(answers: &[&str], affect: Affect, embedder: &dyn Embedder) -> Result<f64> {
    let answers: Vec<&str> = answers
        .iter()
        .copied()
        .filter(|a| !crate::text::tokens(a).is_empty())
        .collect();
    if answers.is_empty() {
        return Ok(0.0);
    }
    let vecs = embedder.embed_batch(&answers)?;
    let mut mean = vec![0.0; vecs[0].len()];
    for v in &vecs {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= vecs.len() as f64);
    let reference = embedder.embed(affect_reference(affect))?;
    Ok(cosine(&mean, &reference).clamp(0.0, 1.0))
}

/// 1 if any locale phrase whose topic was asked appears in an answer.
/// Vacuously 1 when no phrase is eligible.
pub fn linguistic(persona: &PersonaSheet, asked: &BTreeSet<&str>, answers: &[&str]) -> f64 {
    let eligible: Vec<_> = persona
        .locale_phrases
        .iter()
        .filter(|p| p.topic.as_deref().is_none_or(|t| asked.contains(t)))
        .collect();
    if eligible.is_empty() {
        return 1.0;
    }
    let lower: Vec<String> = answers.iter().map(|a| a.to_lowercase()).collect();
    let hit = eligible.iter().any(|p| {
        std::iter::once(&p.text)
            .chain(&p.variants)
            .any(|v| lower.iter().any(|a| a.contains(&v.to_lowercase())))
    });
    if hit {
        1.0
    } else {
        0.0
    }
}

pub fn score_reverse(
    t: &Transcript,
    persona: &PersonaSheet,
    embedder: &dyn Embedder,
    w: &ReverseWeights,
) -> Result<ReverseResult> {
    let answers: Vec<&crate::harness::Turn> = t.turns.iter().filter(|t| t.role == Role::Model).collect();
    let questions = t.turns.iter().filter(|t| t.role == Role::Harness).count();
    let contradictions = answers.iter().filter(|a| a.contradiction.is_some()).count();
    let asked: BTreeSet<&str> = answers
        .iter()
        .flat_map(|a| a.fact_ids.iter().map(String::as_str))
        .filter(|id| persona.fact(id).is_some())
        .collect();
    let disclosed: BTreeSet<&str> = answers
        .iter()
        .flat_map(|a| a.disclosed_fact_ids.iter().map(String::as_str))
        .collect();
    let completeness = if asked.is_empty() {
        1.0
    } else {
        asked.intersection(&disclosed).count() as f64 / asked.len() as f64
    };
    let texts: Vec<&str> = answers.iter().map(|a| a.text.as_str()).collect();
    let style = style_realism(&texts, persona.affect, embedder)?;
    let ling = linguistic(persona, &asked, &texts);
    Ok(ReverseResult::from_components(
        contradictions,
        questions,
        completeness,
        style,
        ling,
        w,
    ))
}
