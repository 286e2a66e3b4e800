use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{tokens, word_count};

pub const DEFAULT_MAX_TURNS: usize = 20;
pub const DEFAULT_QUERY_TOKEN_CAP: usize = 60;

fn default_max_turns() -> usize {
    DEFAULT_MAX_TURNS
}

fn default_token_cap() -> usize {
    DEFAULT_QUERY_TOKEN_CAP
}

/// A hidden decision node the model must ask about to have it revealed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub node_id: String,
    pub label: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    /// Case-insensitive regular expressions.
    #[serde(default)]
    pub patterns: Vec<String>,
    pub reveal_text: String,
    pub critical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub diagnosis: String,
    #[serde(default)]
    pub management: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionVignette {
    pub vignette_id: String,
    pub narrative: String,
    pub hidden_nodes: Vec<Node>,
    pub answer_key: AnswerKey,
    #[serde(default = "default_max_turns")]
    pub max_turns: usize,
    /// Token cap applied to each model query before matching.
    #[serde(default = "default_token_cap")]
    pub query_token_cap: usize,
}

impl DecisionVignette {
    pub fn validate(&self) -> Result<()> {
        if !self.hidden_nodes.iter().any(|n| n.critical) {
            return Err(Error::Validation(format!(
                "vignette {} has no critical node",
                self.vignette_id
            )));
        }
        let mut seen = HashSet::new();
        for n in &self.hidden_nodes {
            if !seen.insert(&n.node_id) {
                return Err(Error::Validation(format!("duplicate node id {}", n.node_id)));
            }
            if n.reveal_text.trim().is_empty() {
                return Err(Error::Validation(format!("node {} has no reveal text", n.node_id)));
            }
        }
        if self.max_turns == 0 || self.query_token_cap == 0 {
            return Err(Error::Validation("max_turns and query_token_cap must be positive".into()));
        }
        Ok(())
    }

    pub fn critical_ids(&self) -> BTreeSet<&str> {
        self.hidden_nodes
            .iter()
            .filter(|n| n.critical)
            .map(|n| n.node_id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Needle {
    pub clue_text: String,
    /// Case-insensitive regular expressions recognizing the clue.
    #[serde(default)]
    pub patterns: Vec<String>,
    /// Downstream implications (term specs, `|` alternatives).
    #[serde(default)]
    pub implication_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManagementKey {
    pub text: String,
    /// Term specs that must all appear in the plan.
    #[serde(default)]
    pub required_elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeedleCase {
    pub case_id: String,
    pub narrative: String,
    pub needle: Needle,
    pub target_disease: String,
    pub distractor_diagnoses: Vec<String>,
    pub management_key: ManagementKey,
    pub locale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactItem {
    pub fact_id: String,
    pub topic: String,
    pub answer: String,
    /// Term specs identifying the fact in an answer; defaults to the
    /// answer's content tokens.
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    pub age: String,
    pub caregiver_role: String,
    pub county: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affect {
    Worried,
    Hesitant,
    Relieved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalePhrase {
    pub text: String,
    #[serde(default)]
    pub variants: Vec<String>,
    /// fact_id whose question should elicit the phrase; `None` = any.
    #[serde(default)]
    pub topic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaSheet {
    pub persona_id: String,
    pub facts: Vec<FactItem>,
    pub demographics: Demographics,
    pub affect: Affect,
    #[serde(default)]
    pub locale_phrases: Vec<LocalePhrase>,
}

impl PersonaSheet {
    pub fn validate(&self) -> Result<()> {
        if self.facts.len() < 5 {
            return Err(Error::Validation(format!(
                "persona {} has {} facts, needs at least 5",
                self.persona_id,
                self.facts.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(f) = self.facts.iter().find(|f| !seen.insert(&f.fact_id)) {
            return Err(Error::Validation(format!("duplicate fact id {}", f.fact_id)));
        }
        Ok(())
    }

    pub fn fact(&self, id: &str) -> Option<&FactItem> {
        self.facts.iter().find(|f| f.fact_id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicianQuestion {
    pub text: String,
    #[serde(default)]
    pub fact_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReverseScenario {
    pub persona: PersonaSheet,
    pub script: Vec<ClinicianQuestion>,
}

/// A keyword rule: respected iff no forbidden term appears and, when any
/// are listed, at least one required term appears.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceConstraint {
    pub description: String,
    #[serde(default)]
    pub forbidden: Vec<String>,
    #[serde(default)]
    pub required: Vec<String>,
}

impl ResourceConstraint {
    /// Parse `avoid <terms>` or `mention <terms>`; terms use `|` alternatives.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (forbidden, required) = if let Some(t) = spec.strip_prefix("avoid ") {
            (vec![t.trim().to_string()], vec![])
        } else if let Some(t) = spec.strip_prefix("mention ") {
            (vec![], vec![t.trim().to_string()])
        } else {
            return Err(Error::Validation(format!(
                "constraint `{spec}` must start with `avoid ` or `mention `"
            )));
        };
        Ok(Self {
            description: spec.to_string(),
            forbidden,
            required,
        })
    }

    pub fn respected_by(&self, text: &str) -> bool {
        let toks = tokens(text);
        let clean = !self.forbidden.iter().any(|t| crate::text::matches_term(&toks, t));
        let mentioned = self.required.is_empty()
            || self.required.iter().any(|t| crate::text::matches_term(&toks, t));
        clean && mentioned
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoAnswerKey {
    pub required_antigens: BTreeSet<String>,
    pub formulation: String,
    #[serde(default)]
    pub resource_constraints: Vec<ResourceConstraint>,
    #[serde(default)]
    pub locale_factors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoScenario {
    pub locale: String,
    pub setting_tier: String,
    pub narrative: String,
    pub answer_key: GeoAnswerKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoPair {
    pub pair_id: String,
    pub scenario_a: GeoScenario,
    pub scenario_b: GeoScenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasType {
    Anchoring,
    Confirmation,
    PrematureClosure,
    Availability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasCase {
    pub case_id: String,
    pub bias_type: BiasType,
    pub stage1: String,
    pub anchor_diagnosis: String,
    pub stage2_red_flag: String,
    /// Term specs recognizing a reference to the red flag.
    #[serde(default)]
    pub red_flag_terms: Vec<String>,
    pub correct_diagnosis: String,
    #[serde(default)]
    pub confirmatory_actions: Vec<String>,
    #[serde(default)]
    pub reasoning_chain: Vec<String>,
    #[serde(default)]
    pub expected_differential: Vec<String>,
    pub expected_count: usize,
}

impl BiasCase {
    pub fn validate(&self, vocab: &crate::vocab::Vocabulary) -> Result<()> {
        if vocab.normalize(&self.anchor_diagnosis) == vocab.normalize(&self.correct_diagnosis) {
            return Err(Error::Validation(format!(
                "bias case {}: anchor equals correct diagnosis",
                self.case_id
            )));
        }
        if self.stage2_red_flag.trim().is_empty() {
            return Err(Error::Precondition(format!(
                "bias case {}: stage2 text is empty",
                self.case_id
            )));
        }
        if self
            .stage1
            .to_lowercase()
            .contains(&self.stage2_red_flag.to_lowercase())
        {
            return Err(Error::Validation(format!(
                "bias case {}: red flag already present in stage 1",
                self.case_id
            )));
        }
        if self.expected_count == 0 {
            return Err(Error::Validation(format!(
                "bias case {}: expected_count must be positive",
                self.case_id
            )));
        }
        Ok(())
    }
}

/// One scenario record; the `kind` tag selects the metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Decision(DecisionVignette),
    Needle(NeedleCase),
    Reverse(ReverseScenario),
    Geo(GeoPair),
    Bias(BiasCase),
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Scenario::Decision(_) => ScenarioKind::Decision,
            Scenario::Needle(_) => ScenarioKind::Needle,
            Scenario::Reverse(_) => ScenarioKind::Reverse,
            Scenario::Geo(_) => ScenarioKind::Geo,
            Scenario::Bias(_) => ScenarioKind::Bias,
        }
    }

    /// Check the kind's structural invariants (audits are separate).
    pub fn validate(&self, vocab: &crate::vocab::Vocabulary) -> Result<()> {
        match self {
            Scenario::Decision(v) => v.validate(),
            Scenario::Needle(_) | Scenario::Geo(_) => Ok(()),
            Scenario::Reverse(r) => r.persona.validate(),
            Scenario::Bias(b) => b.validate(vocab),
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Scenario::Decision(v) => &v.vignette_id,
            Scenario::Needle(c) => &c.case_id,
            Scenario::Reverse(r) => &r.persona.persona_id,
            Scenario::Geo(g) => &g.pair_id,
            Scenario::Bias(b) => &b.case_id,
        }
    }
}

pub fn narrative_word_count(case: &NeedleCase) -> usize {
    word_count(&case.narrative)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Decision,
    Needle,
    Reverse,
    Geo,
    Bias,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Decision,
        ScenarioKind::Needle,
        ScenarioKind::Reverse,
        ScenarioKind::Geo,
        ScenarioKind::Bias,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Decision => "decision",
            ScenarioKind::Needle => "needle",
            ScenarioKind::Reverse => "reverse",
            ScenarioKind::Geo => "geo",
            ScenarioKind::Bias => "bias",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown scenario kind `{s}`")))
    }
}
