//! Item generation: prompt assembly, strict output parsing, audit, quota
//! balancing and translation.

mod audit;
mod batch;
pub mod grammar;
mod item;
mod mock;
pub mod prompt;
mod quota;
mod store;
mod translate;

pub use audit::{audit_item, detect_language, AuditOutcome, SWAHILI_THRESHOLD};
pub use batch::{generate_batch, select_for_translation, BatchOutcome, GenerationConfig};
pub use grammar::{parse_mcq_output, render_block, ParseDiagnostic, ParseRule, ParsedBlock};
pub use item::{Citation, ItemSource, ItemStatus, Language, Letter, McqItem, Options};
pub use mock::TemplateGenerator;
pub use prompt::{build_case_prompt, CASE_PROMPT};
pub use quota::{enforce_quota, enforce_quota_with_caps, part_caps};
pub use store::{mark_stale, read_items, transition_logged, write_items, StatusChange};
pub use translate::translate_item;
