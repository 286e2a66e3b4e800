use serde::{Deserialize, Serialize};

use super::rubric::{CriterionMeans, RubricScore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionThresholds {
    /// Minimum guideline_alignment mean to accept.
    pub accept_alignment: f64,
    /// Minimum mean of every other criterion to accept.
    pub accept_others: f64,
    /// Any criterion mean below this rejects.
    pub reject_below: f64,
    /// Score range across reviewers that raises the dissent flag.
    pub dissent_range: u8,
}

impl Default for DecisionThresholds {
    fn default() -> Self {
        Self {
            accept_alignment: 4.0,
            accept_others: 3.0,
            reject_below: 2.0,
            dissent_range: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Revise,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub item_id: String,
    pub n_reviews: usize,
    pub means: CriterionMeans,
    pub decision: Verdict,
    pub dissent_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Aggregation {
    Ready(ReviewDecision),
    NotReady { item_id: String, n_reviews: usize, required: usize },
}

/// Rejection is checked first, so an item can never be both accepted and
/// rejected. The result does not depend on review order.
pub fn aggregate(item_id: &str, scores: &[RubricScore], r: usize, t: &DecisionThresholds) -> Result<Aggregation> {
    if r == 0 {
        return Err(Error::Config("redundancy must be at least 1".into()));
    }
    if scores.len() < r {
        return Ok(Aggregation::NotReady {
            item_id: item_id.into(),
            n_reviews: scores.len(),
            required: r,
        });
    }
    let n = scores.len() as f64;
    let mut sums = [0u32; 5];
    let mut lo = [u8::MAX; 5];
    let mut hi = [0u8; 5];
    for s in scores {
        s.validate()?;
        for (i, v) in s.values().into_iter().enumerate() {
            sums[i] += v as u32;
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let means = sums.map(|s| s as f64 / n);
    let decision = if means.iter().any(|m| *m < t.reject_below) {
        Verdict::Rejected
    } else if means[1] >= t.accept_alignment
        && means.iter().enumerate().all(|(i, m)| i == 1 || *m >= t.accept_others)
    {
        Verdict::Accepted
    } else {
        Verdict::Revise
    };
    let dissent_flag = (0..5).any(|i| hi[i] - lo[i] >= t.dissent_range);
    Ok(Aggregation::Ready(ReviewDecision {
        item_id: item_id.into(),
        n_reviews: scores.len(),
        means: CriterionMeans::from_values(means),
        decision,
        dissent_flag,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ready(a: Aggregation) -> ReviewDecision {
        match a {
            Aggregation::Ready(d) => d,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_fives_accepted() {
        let s = vec![RubricScore::uniform(5); 2];
        let d = ready(aggregate("i", &s, 2, &Default::default()).unwrap());
        assert_eq!(d.decision, Verdict::Accepted);
        assert!(!d.dissent_flag);
    }

    #[test]
    fn split_alignment_revises_with_dissent() {
        let mut a = RubricScore::uniform(4);
        a.guideline_alignment = 5;
        let mut b = RubricScore::uniform(4);
        b.guideline_alignment = 2;
        let d = ready(aggregate("i", &[a, b], 2, &Default::default()).unwrap());
        assert_eq!(d.means.guideline_alignment, 3.5);
        assert_eq!(d.decision, Verdict::Revise);
        assert!(d.dissent_flag);
    }

    #[test]
    fn low_mean_rejects() {
        let mut a = RubricScore::uniform(5);
        a.clarity_completeness = 1;
        let mut b = RubricScore::uniform(5);
        b.clarity_completeness = 2;
        let d = ready(aggregate("i", &[a, b], 2, &Default::default()).unwrap());
        assert_eq!(d.means.clarity_completeness, 1.5);
        assert_eq!(d.decision, Verdict::Rejected);
    }

    #[test]
    fn not_ready_below_redundancy() {
        let a = aggregate("i", &[RubricScore::uniform(5)], 2, &Default::default()).unwrap();
        assert!(matches!(a, Aggregation::NotReady { n_reviews: 1, required: 2, .. }));
    }
}
