use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::harness::Transcript;
use crate::scenario::DecisionVignette;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionPointResult {
    pub n_asked: usize,
    pub n_critical: usize,
    pub n_asked_critical: usize,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub score10: f64,
}

impl DecisionPointResult {
    pub fn from_counts(n_asked: usize, n_critical: usize, n_asked_critical: usize) -> Self {
        let precision = if n_asked == 0 {
            0.0
        } else {
            n_asked_critical as f64 / n_asked as f64
        };
        let recall = if n_critical == 0 {
            0.0
        } else {
            n_asked_critical as f64 / n_critical as f64
        };
        let f = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            n_asked,
            n_critical,
            n_asked_critical,
            precision,
            recall,
            f,
            score10: 10.0 * f,
        }
    }
}

/// Counts use events before the final answer. Every query that matched no
/// new node is superfluous and still counts toward `n_asked`.
pub fn score_decision_points(t: &Transcript, v: &DecisionVignette) -> DecisionPointResult {
    let known: BTreeSet<&str> = v.hidden_nodes.iter().map(|n| n.node_id.as_str()).collect();
    let mut matched = BTreeSet::new();
    let mut unmatched = 0;
    for turn in t.turns.iter().take_while(|t| !t.is_final) {
        let new: Vec<&str> = turn
            .matched_node_ids
            .iter()
            .map(String::as_str)
            .filter(|id| known.contains(id))
            .collect();
        if turn.is_query && new.is_empty() {
            unmatched += 1;
        }
        matched.extend(new);
    }
    let critical = v.critical_ids();
    let hit = matched.intersection(&critical).count();
    DecisionPointResult::from_counts(matched.len() + unmatched, critical.len(), hit)
}
