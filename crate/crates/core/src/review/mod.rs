//! Blinded expert review: seeded assignment of items and external
//! distractors, rubric scoring over HTTP and accept/revise/reject
//! decisions.

mod aggregate;
mod assign;
mod board;
mod rubric;
mod service;

pub use aggregate::{aggregate, Aggregation, DecisionThresholds, ReviewDecision, Verdict};
pub use assign::{assign_blinded, AssignmentState, ReviewAssignment};
pub use board::{Counts, MaskedPayload, Progress, QueueView, ReviewBoard, ScoreRecord};
pub use rubric::{CriterionMeans, RubricScore, CRITERIA};
pub use service::{router, serve, Principal, Tokens, ADMIN_TOKEN_ENV, REVIEWER_TOKENS_ENV};

use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Reviewer {
    pub reviewer_id: String,
}

/// Reviewers file: JSONL of `{"reviewer_id": ...}`.
pub fn read_reviewers(path: &Path) -> Result<Vec<String>> {
    let r: Vec<Reviewer> = crate::jsonl::read(path)?;
    Ok(r.into_iter().map(|r| r.reviewer_id).collect())
}
