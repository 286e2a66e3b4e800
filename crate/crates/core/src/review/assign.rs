use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generation::{ItemSource, McqItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentState {
    Pending,
    Scored,
}

/// Server-side assignment record. `item_id` and `source` never leave the
/// server; reviewers only see `masked_item_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewAssignment {
    pub assignment_id: String,
    pub reviewer_id: String,
    pub masked_item_id: String,
    pub item_id: String,
    pub source: ItemSource,
    pub position: usize,
    pub state: AssignmentState,
}

fn token(rng: &mut ChaCha8Rng, prefix: &str) -> String {
    format!("{prefix}-{:032x}", rng.gen::<u128>())
}

/// Give every item (own and distractor) to `r` distinct reviewers,
/// least-loaded first with seeded tie-breaks, then shuffle each reviewer's
/// queue. Masked ids are fresh random tokens per assignment.
pub fn assign_blinded(
    items: &[McqItem],
    distractors: &[McqItem],
    reviewers: &[String],
    r: usize,
    seed: u64,
) -> Result<Vec<ReviewAssignment>> {
    if reviewers.is_empty() {
        return Err(Error::Config("at least one reviewer is required".into()));
    }
    if r == 0 {
        return Err(Error::Config("redundancy must be at least 1".into()));
    }
    if r > reviewers.len() {
        return Err(Error::Config(format!(
            "redundancy {r} exceeds the {} available reviewers",
            reviewers.len()
        )));
    }
    let mut ids = HashSet::new();
    if let Some(dup) = reviewers.iter().find(|r| !ids.insert(r.as_str())) {
        return Err(Error::Config(format!("duplicate reviewer {dup}")));
    }
    let mut pool: Vec<(&str, ItemSource)> = items.iter().map(|i| (i.item_id.as_str(), i.source)).collect();
    for d in distractors {
        if d.source != ItemSource::External {
            return Err(Error::Validation(format!(
                "distractor {} must carry source \"external\"",
                d.item_id
            )));
        }
        pool.push((d.item_id.as_str(), ItemSource::External));
    }
    let mut seen = HashSet::new();
    if let Some((dup, _)) = pool.iter().find(|(id, _)| !seen.insert(*id)) {
        return Err(Error::Validation(format!("item {dup} appears twice")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut queues: Vec<Vec<(&str, ItemSource)>> = vec![Vec::new(); reviewers.len()];
    for &(id, source) in &pool {
        let mut order: Vec<(usize, u64, usize)> = queues
            .iter()
            .enumerate()
            .map(|(i, q)| (q.len(), rng.gen::<u64>(), i))
            .collect();
        order.sort_unstable();
        for &(_, _, i) in order.iter().take(r) {
            queues[i].push((id, source));
        }
    }
    let mut out = Vec::with_capacity(pool.len() * r);
    for (reviewer, queue) in reviewers.iter().zip(queues.iter_mut()) {
        queue.shuffle(&mut rng);
        for (position, &(id, source)) in queue.iter().enumerate() {
            out.push(ReviewAssignment {
                assignment_id: token(&mut rng, "asg"),
                reviewer_id: reviewer.clone(),
                masked_item_id: token(&mut rng, "msk"),
                item_id: id.to_string(),
                source,
                position,
                state: AssignmentState::Pending,
            });
        }
    }
    Ok(out)
}
