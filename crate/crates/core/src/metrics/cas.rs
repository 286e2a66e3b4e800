use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::weights::CasWeights;
use crate::harness::GeoAnswer;
use crate::scenario::GeoAnswerKey;
use crate::text::{matches_term, tokens};
use crate::vocab::Vocabulary;

/// |a ∩ b| / |a ∪ b|, defined as 1 when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasResult {
    pub antigen_accuracy: f64,
    pub formulation_fit: f64,
    pub resource_alignment: f64,
    pub rationale_localization: f64,
    pub cas10: f64,
}

impl CasResult {
    pub fn from_components(antigen: f64, formulation: f64, resource: f64, rationale: f64, w: &CasWeights) -> Self {
        Self {
            antigen_accuracy: antigen,
            formulation_fit: formulation,
            resource_alignment: resource,
            rationale_localization: rationale,
            cas10: 10.0
                * (w.antigen * antigen
                    + w.formulation * formulation
                    + w.resource * resource
                    + w.rationale * rationale),
        }
    }
}

pub fn normalized_set(vocab: &Vocabulary, labels: &BTreeSet<String>) -> BTreeSet<String> {
    labels.iter().map(|l| vocab.normalize(l)).collect()
}

/// Resource rules and locale factors are checked against the counselling
/// text; an empty list of either scores 1.
pub fn score_cas(answer: &GeoAnswer, key: &GeoAnswerKey, vocab: &Vocabulary, w: &CasWeights) -> CasResult {
    let antigen = jaccard(
        &normalized_set(vocab, &answer.antigens),
        &normalized_set(vocab, &key.required_antigens),
    );
    let formulation = if vocab.normalize(&answer.formulation) == vocab.normalize(&key.formulation) {
        1.0
    } else {
        0.0
    };
    let resource = if key.resource_constraints.is_empty() {
        1.0
    } else {
        let ok = key
            .resource_constraints
            .iter()
            .filter(|c| c.respected_by(&answer.counselling))
            .count();
        ok as f64 / key.resource_constraints.len() as f64
    };
    let toks = tokens(&answer.counselling);
    let rationale = if key.locale_factors.is_empty() || key.locale_factors.iter().any(|f| matches_term(&toks, f)) {
        1.0
    } else {
        0.0
    };
    CasResult::from_components(antigen, formulation, resource, rationale, w)
}

/// Mean CAS minus a penalty for predictions that agree across locales more
/// than the keys do. Not defined in the source literature; this is our
/// construction and reports label it as such.
pub fn delta_cas(
    cas_a: f64,
    cas_b: f64,
    pred_a: &BTreeSet<String>,
    pred_b: &BTreeSet<String>,
    req_a: &BTreeSet<String>,
    req_b: &BTreeSet<String>,
) -> f64 {
    (cas_a + cas_b) / 2.0 - 10.0 * (jaccard(pred_a, pred_b) - jaccard(req_a, req_b)).max(0.0)
}
