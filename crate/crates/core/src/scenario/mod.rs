//! Metric-specific scenarios with hidden ground truth: decision vignettes,
//! needle cases, persona sheets, locale pairs and bias cases.

mod audit;
mod flow;
mod forge;
mod geo;
mod types;

pub use audit::{audit_needle_case, occurrences, NeedleAudit, MAX_WORDS, MIN_DISTRACTORS, MIN_WORDS};
pub use flow::{extract_decision_nodes, render_marker, Extraction, MARKER};
pub use forge::{forge_prompt, forge_with_backend};
pub use geo::{
    answer_key, build_geo_pair, bundled_schedule, load_schedule, parse_schedule, GeoTemplate,
    LocaleProfile, ScheduleEntry,
};
pub use types::*;

use std::path::Path;

use crate::error::Result;

/// Load a scenario JSONL file; every record needs a known `kind`.
pub fn read_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    crate::jsonl::read(path)
}

pub fn write_scenarios(path: &Path, scenarios: &[Scenario]) -> Result<()> {
    crate::jsonl::write(path, scenarios)
}
