//! Guideline ingestion: marker-text parsing, chunking with provenance,
//! per-part content distribution and version diffing.

mod chunk;
mod diff;
mod markup;
mod store;

pub use chunk::{chunk_document, part_distribution, ChunkConfig};
pub use diff::{diff_versions, ChangeSet};
pub use markup::{parse_marker_text, Block, StructureDiagnostic};
pub use store::{read_chunks, write_chunks};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartHeading {
    pub label: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidelineDoc {
    pub doc_id: String,
    pub title: String,
    pub publisher: String,
    pub version_tag: String,
    pub parts: Vec<PartHeading>,
    pub source_uri: String,
    /// Body blocks in document order.
    #[serde(skip)]
    pub blocks: Vec<Block>,
}

/// A guideline excerpt with provenance. Field names are the chunk store's
/// JSONL schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidelineChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub section_path: Vec<String>,
    pub page_start: u32,
    pub page_end: u32,
    pub text: String,
    pub word_count: usize,
    pub content_hash: u64,
}

impl GuidelineChunk {
    /// The top-level part this chunk belongs to.
    pub fn part_label(&self) -> &str {
        self.section_path.first().map(String::as_str).unwrap_or("")
    }

    pub fn section_title(&self) -> &str {
        self.section_path.last().map(String::as_str).unwrap_or("")
    }
}

/// FNV-1a over lowercased, whitespace-collapsed text.
pub fn content_hash(text: &str) -> u64 {
    crate::text::fnv1a64(crate::text::normalize_whitespace_lower(text).as_bytes())
}
