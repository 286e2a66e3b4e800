use std::path::Path;

use super::GuidelineChunk;
use crate::error::Result;

/// Write one chunk per line.
pub fn write_chunks(path: &Path, chunks: &[GuidelineChunk]) -> Result<()> {
    crate::jsonl::write(path, chunks)
}

pub fn read_chunks(path: &Path) -> Result<Vec<GuidelineChunk>> {
    crate::jsonl::read(path)
}
