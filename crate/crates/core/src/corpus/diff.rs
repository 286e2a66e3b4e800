use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GuidelineChunk;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub added: Vec<String>,
    pub removed: Vec<String>,
    /// (old chunk_id, new chunk_id)
    pub modified: Vec<(String, String)>,
    /// Items citing removed or modified chunks; filled by the caller.
    #[serde(default)]
    pub affected_items: Vec<String>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.modified.is_empty()
    }

    /// Old-version chunk ids whose citations become stale.
    pub fn stale_chunk_ids(&self) -> impl Iterator<Item = &str> {
        self.removed
            .iter()
            .map(String::as_str)
            .chain(self.modified.iter().map(|(old, _)| old.as_str()))
    }
}

/// Chunks are paired by (section_path, ordinal among chunks sharing that
/// path). Equal hash → unchanged; different hash → modified.
pub fn diff_versions(old: &[GuidelineChunk], new: &[GuidelineChunk]) -> ChangeSet {
    fn keyed(chunks: &[GuidelineChunk]) -> BTreeMap<(Vec<String>, usize), &GuidelineChunk> {
        let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
        let mut out = BTreeMap::new();
        for c in chunks {
            let n = counts.entry(c.section_path.clone()).or_insert(0);
            out.insert((c.section_path.clone(), *n), c);
            *n += 1;
        }
        out
    }
    let old_k = keyed(old);
    let new_k = keyed(new);
    let mut cs = ChangeSet::default();

    // Walk in new-document order so `added`/`modified` follow the new layout.
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for c in new {
        let n = counts.entry(c.section_path.clone()).or_insert(0);
        let key = (c.section_path.clone(), *n);
        *n += 1;
        match old_k.get(&key) {
            None => cs.added.push(c.chunk_id.clone()),
            Some(o) if o.content_hash != c.content_hash => {
                cs.modified.push((o.chunk_id.clone(), c.chunk_id.clone()))
            }
            Some(_) => {}
        }
    }
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for c in old {
        let n = counts.entry(c.section_path.clone()).or_insert(0);
        if !new_k.contains_key(&(c.section_path.clone(), *n)) {
            cs.removed.push(c.chunk_id.clone());
        }
        *n += 1;
    }
    cs
}
