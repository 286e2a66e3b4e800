use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CRITERIA: [&str; 5] = [
    "clinical_relevance",
    "guideline_alignment",
    "clarity_completeness",
    "distractor_plausibility",
    "language_cultural",
];

/// Five-criterion review score, each 1–5.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RubricScore {
    pub clinical_relevance: u8,
    pub guideline_alignment: u8,
    pub clarity_completeness: u8,
    pub distractor_plausibility: u8,
    pub language_cultural: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl RubricScore {
    pub fn uniform(v: u8) -> Self {
        Self {
            clinical_relevance: v,
            guideline_alignment: v,
            clarity_completeness: v,
            distractor_plausibility: v,
            language_cultural: v,
            comment: None,
        }
    }

    /// Values in [`CRITERIA`] order.
    pub fn values(&self) -> [u8; 5] {
        [
            self.clinical_relevance,
            self.guideline_alignment,
            self.clarity_completeness,
            self.distractor_plausibility,
            self.language_cultural,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in CRITERIA.iter().zip(self.values()) {
            if !(1..=5).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} is outside 1-5")));
            }
        }
        Ok(())
    }
}

/// Per-criterion means, in the same shape as the rubric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionMeans {
    pub clinical_relevance: f64,
    pub guideline_alignment: f64,
    pub clarity_completeness: f64,
    pub distractor_plausibility: f64,
    pub language_cultural: f64,
}

impl CriterionMeans {
    pub fn from_values(v: [f64; 5]) -> Self {
        Self {
            clinical_relevance: v[0],
            guideline_alignment: v[1],
            clarity_completeness: v[2],
            distractor_plausibility: v[3],
            language_cultural: v[4],
        }
    }

    pub fn values(&self) -> [f64; 5] {
        [
            self.clinical_relevance,
            self.guideline_alignment,
            self.clarity_completeness,
            self.distractor_plausibility,
            self.language_cultural,
        ]
    }
}
