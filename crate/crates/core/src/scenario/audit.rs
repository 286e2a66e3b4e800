use serde::{Deserialize, Serialize};

use crate::text::word_count;

use super::types::NeedleCase;

pub const MIN_WORDS: usize = 300;
pub const MAX_WORDS: usize = 500;
pub const MIN_DISTRACTORS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NeedleAudit {
    Pass,
    Fail { reasons: Vec<String> },
}

impl NeedleAudit {
    pub fn passed(&self) -> bool {
        matches!(self, NeedleAudit::Pass)
    }
}

/// Non-overlapping occurrences of `needle` in `hay`.
pub fn occurrences(hay: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    hay.matches(needle).count()
}

pub fn audit_needle_case(case: &NeedleCase) -> NeedleAudit {
    let mut reasons = Vec::new();
    let d = case.distractor_diagnoses.len();
    if d < MIN_DISTRACTORS {
        reasons.push(format!("distractor count = {d}"));
    }
    let c = occurrences(&case.narrative, &case.needle.clue_text);
    if c != 1 {
        reasons.push(format!("clue count = {c}"));
    }
    if case.management_key.text.trim().is_empty() || case.target_disease.trim().is_empty() {
        reasons.push("no guideline-consistent management for target".to_string());
    }
    let w = word_count(&case.narrative);
    if !(MIN_WORDS..=MAX_WORDS).contains(&w) {
        reasons.push(format!("word count = {w}"));
    }
    if reasons.is_empty() {
        NeedleAudit::Pass
    } else {
        NeedleAudit::Fail { reasons }
    }
}
