use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

fn check(name: &str, ws: &[f64]) -> Result<()> {
    if ws.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::Config(format!("{name} weights must lie in [0,1]")));
    }
    let sum: f64 = ws.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::Config(format!("{name} weights sum to {sum}, not 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReverseWeights {
    pub consistency: f64,
    pub completeness: f64,
    pub style_realism: f64,
    pub linguistic: f64,
}

impl Default for ReverseWeights {
    fn default() -> Self {
        Self {
            consistency: 0.4,
            completeness: 0.3,
            style_realism: 0.2,
            linguistic: 0.1,
        }
    }
}

impl ReverseWeights {
    pub fn validate(&self) -> Result<()> {
        check(
            "reverse",
            &[self.consistency, self.completeness, self.style_realism, self.linguistic],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasWeights {
    pub antigen: f64,
    pub formulation: f64,
    pub resource: f64,
    pub rationale: f64,
}

impl Default for CasWeights {
    fn default() -> Self {
        Self {
            antigen: 0.35,
            formulation: 0.25,
            resource: 0.25,
            rationale: 0.15,
        }
    }
}

impl CasWeights {
    pub fn validate(&self) -> Result<()> {
        check("cas", &[self.antigen, self.formulation, self.resource, self.rationale])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbstWeights {
    pub flexibility: f64,
    pub contradiction: f64,
    pub breadth: f64,
    pub action: f64,
}

impl Default for CbstWeights {
    fn default() -> Self {
        Self {
            flexibility: 0.40,
            contradiction: 0.25,
            breadth: 0.20,
            action: 0.15,
        }
    }
}

impl CbstWeights {
    pub fn validate(&self) -> Result<()> {
        check(
            "cbst",
            &[self.flexibility, self.contradiction, self.breadth, self.action],
        )
    }
}

/// Scoring knobs shared by every scorer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Embedding similarity threshold for clue and red-flag detection.
    pub similarity_threshold: f64,
    /// Differential depth that counts as a correct needle diagnosis.
    pub top_k: usize,
    pub reverse: ReverseWeights,
    pub cas: CasWeights,
    pub cbst: CbstWeights,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.75,
            top_k: 3,
            reverse: ReverseWeights::default(),
            cas: CasWeights::default(),
            cbst: CbstWeights::default(),
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(Error::Config("similarity_threshold must lie in [0,1]".into()));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        self.reverse.validate()?;
        self.cas.validate()?;
        self.cbst.validate()
    }
}
