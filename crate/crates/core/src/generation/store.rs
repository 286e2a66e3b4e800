use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ItemStatus, McqItem};
use crate::corpus::ChangeSet;
use crate::error::Result;

pub fn read_items(path: &Path) -> Result<Vec<McqItem>> {
    crate::jsonl::read(path)
}

pub fn write_items(path: &Path, items: &[McqItem]) -> Result<()> {
    crate::jsonl::write(path, items)
}

/// One line of the append-only status audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusChange {
    pub item_id: String,
    pub old_status: ItemStatus,
    pub new_status: ItemStatus,
    pub timestamp_ms: u64,
    pub actor: String,
}

/// Move an item to `to` and append the change to `log`.
pub fn transition_logged(
    item: &mut McqItem,
    to: ItemStatus,
    actor: &str,
    timestamp_ms: u64,
    log: &Path,
) -> Result<()> {
    let old = item.transition(to)?;
    crate::jsonl::append(
        log,
        &StatusChange {
            item_id: item.item_id.clone(),
            old_status: old,
            new_status: to,
            timestamp_ms,
            actor: actor.to_string(),
        },
    )
}

/// Mark items citing removed or modified chunks as stale; returns their
/// ids and records them on the change set.
pub fn mark_stale(items: &mut [McqItem], changes: &mut ChangeSet) -> Vec<String> {
    let stale: HashSet<&str> = changes.stale_chunk_ids().collect();
    let mut flagged = Vec::new();
    for it in items.iter_mut() {
        if stale.contains(it.citation.chunk_id.as_str()) && it.transition(ItemStatus::Stale).is_ok() {
            flagged.push(it.item_id.clone());
        }
    }
    changes.affected_items = flagged.clone();
    flagged
}
