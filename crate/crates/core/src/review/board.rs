use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, Aggregation, DecisionThresholds, ReviewDecision};
use super::assign::{AssignmentState, ReviewAssignment};
use super::rubric::RubricScore;
use crate::error::{Error, Result};
use crate::generation::{Letter, McqItem, Options};
use crate::harness::{Clock, SystemClock};

/// What a reviewer sees for one assignment. Identical shape for every
/// item source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedPayload {
    pub assignment_id: String,
    pub masked_item_id: String,
    pub position: usize,
    pub state: AssignmentState,
    pub question: String,
    pub options: Options,
    pub proposed_answer: Letter,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueView {
    pub reviewer_id: String,
    pub pending: usize,
    pub scored: usize,
    /// Pending assignments in queue order.
    pub assignments: Vec<MaskedPayload>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pending: usize,
    pub scored: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub total: usize,
    pub pending: usize,
    pub scored: usize,
    pub by_reviewer: BTreeMap<String, Counts>,
}

/// One line of the append-only score log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub assignment_id: String,
    pub reviewer_id: String,
    pub rubric: RubricScore,
    pub recorded_ms: u64,
}

struct Inner {
    assignments: Vec<ReviewAssignment>,
    scores: HashMap<String, RubricScore>,
}

/// Assignment table plus score log; all mutation goes through one lock so
/// each submission is atomic.
pub struct ReviewBoard {
    items: HashMap<String, McqItem>,
    index: HashMap<String, usize>,
    redundancy: usize,
    thresholds: DecisionThresholds,
    log: Option<PathBuf>,
    clock: Box<dyn Clock>,
    inner: Mutex<Inner>,
}

impl ReviewBoard {
    pub fn new(
        items: impl IntoIterator<Item = McqItem>,
        assignments: Vec<ReviewAssignment>,
        redundancy: usize,
        thresholds: DecisionThresholds,
    ) -> Result<Self> {
        let items: HashMap<String, McqItem> = items.into_iter().map(|i| (i.item_id.clone(), i)).collect();
        let mut index = HashMap::new();
        for (i, a) in assignments.iter().enumerate() {
            if !items.contains_key(&a.item_id) {
                return Err(Error::Validation(format!(
                    "assignment {} references unknown item",
                    a.assignment_id
                )));
            }
            if index.insert(a.assignment_id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate assignment {}", a.assignment_id)));
            }
        }
        Ok(Self {
            items,
            index,
            redundancy: redundancy.max(1),
            thresholds,
            log: None,
            clock: Box::new(SystemClock),
            inner: Mutex::new(Inner {
                assignments,
                scores: HashMap::new(),
            }),
        })
    }

    /// Persist scores to `path`, replaying any scores already logged there.
    pub fn with_score_log(mut self, path: &Path) -> Result<Self> {
        if path.exists() {
            let records: Vec<ScoreRecord> = crate::jsonl::read(path)?;
            let inner = self.inner.get_mut().expect("fresh lock");
            for r in records {
                let Some(&i) = self.index.get(&r.assignment_id) else {
                    return Err(Error::Validation(format!(
                        "{}: score for unknown assignment {}",
                        path.display(),
                        r.assignment_id
                    )));
                };
                inner.assignments[i].state = AssignmentState::Scored;
                inner.scores.insert(r.assignment_id, r.rubric);
            }
        }
        self.log = Some(path.to_path_buf());
        Ok(self)
    }

    pub fn with_clock(mut self, clock: Box<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn assignments(&self) -> Vec<ReviewAssignment> {
        self.lock().assignments.clone()
    }

    pub fn assignment(&self, assignment_id: &str) -> Result<ReviewAssignment> {
        let &i = self
            .index
            .get(assignment_id)
            .ok_or_else(|| Error::NotFound(format!("assignment {assignment_id}")))?;
        Ok(self.lock().assignments[i].clone())
    }

    fn payload(&self, a: &ReviewAssignment) -> MaskedPayload {
        let item = &self.items[&a.item_id];
        MaskedPayload {
            assignment_id: a.assignment_id.clone(),
            masked_item_id: a.masked_item_id.clone(),
            position: a.position,
            state: a.state,
            question: item.question.clone(),
            options: item.options.clone(),
            proposed_answer: item.correct,
            explanation: item.explanation.clone(),
        }
    }

    pub fn masked(&self, assignment_id: &str) -> Result<MaskedPayload> {
        Ok(self.payload(&self.assignment(assignment_id)?))
    }

    pub fn queue(&self, reviewer_id: &str) -> QueueView {
        let inner = self.lock();
        let mine: Vec<&ReviewAssignment> = inner
            .assignments
            .iter()
            .filter(|a| a.reviewer_id == reviewer_id)
            .collect();
        let mut pending: Vec<&ReviewAssignment> = mine
            .iter()
            .copied()
            .filter(|a| a.state == AssignmentState::Pending)
            .collect();
        pending.sort_by_key(|a| a.position);
        QueueView {
            reviewer_id: reviewer_id.into(),
            pending: pending.len(),
            scored: mine.len() - pending.len(),
            assignments: pending.into_iter().map(|a| self.payload(a)).collect(),
        }
    }

    /// Score a pending assignment exactly once.
    pub fn record_score(&self, assignment_id: &str, rubric: RubricScore) -> Result<ReviewAssignment> {
        rubric.validate()?;
        let &i = self
            .index
            .get(assignment_id)
            .ok_or_else(|| Error::NotFound(format!("assignment {assignment_id}")))?;
        let mut inner = self.lock();
        if inner.assignments[i].state == AssignmentState::Scored {
            return Err(Error::Conflict(format!("assignment {assignment_id} is already scored")));
        }
        if let Some(path) = &self.log {
            crate::jsonl::append(
                path,
                &ScoreRecord {
                    assignment_id: assignment_id.into(),
                    reviewer_id: inner.assignments[i].reviewer_id.clone(),
                    rubric: rubric.clone(),
                    recorded_ms: self.clock.now_ms(),
                },
            )?;
        }
        inner.assignments[i].state = AssignmentState::Scored;
        inner.scores.insert(assignment_id.into(), rubric);
        Ok(inner.assignments[i].clone())
    }

    pub fn decision(&self, item_id: &str) -> Result<Aggregation> {
        if !self.items.contains_key(item_id) {
            return Err(Error::NotFound(format!("item {item_id}")));
        }
        let inner = self.lock();
        self.aggregate_locked(&inner, item_id)
    }

    fn aggregate_locked(&self, inner: &Inner, item_id: &str) -> Result<Aggregation> {
        let scores: Vec<RubricScore> = inner
            .assignments
            .iter()
            .filter(|a| a.item_id == item_id)
            .filter_map(|a| inner.scores.get(&a.assignment_id).cloned())
            .collect();
        aggregate(item_id, &scores, self.redundancy, &self.thresholds)
    }

    /// Decisions for every item with enough reviews, by item id.
    pub fn decisions(&self) -> Result<Vec<ReviewDecision>> {
        let inner = self.lock();
        let mut ids: Vec<&str> = inner.assignments.iter().map(|a| a.item_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut out = Vec::new();
        for id in ids {
            if let Aggregation::Ready(d) = self.aggregate_locked(&inner, id)? {
                out.push(d);
            }
        }
        Ok(out)
    }

    pub fn progress(&self) -> Progress {
        let inner = self.lock();
        let mut by_reviewer: BTreeMap<String, Counts> = BTreeMap::new();
        for a in &inner.assignments {
            let c = by_reviewer.entry(a.reviewer_id.clone()).or_default();
            match a.state {
                AssignmentState::Pending => c.pending += 1,
                AssignmentState::Scored => c.scored += 1,
            }
        }
        let scored = by_reviewer.values().map(|c| c.scored).sum();
        Progress {
            total: inner.assignments.len(),
            pending: inner.assignments.len() - scored,
            scored,
            by_reviewer,
        }
    }
}
