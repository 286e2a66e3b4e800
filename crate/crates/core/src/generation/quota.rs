use std::collections::{BTreeMap, HashSet};

use super::McqItem;
use crate::error::{Error, Result};

/// Guards against `0.31 * 100 = 31.000000000000004` rounding up to 32.
const CAP_EPSILON: f64 = 1e-9;

/// Per-part cap: `ceil(fraction × total_cap)`, optionally tightened by an
/// explicit per-part maximum.
pub fn part_caps(
    distribution: &BTreeMap<String, f64>,
    total_cap: usize,
    explicit: &BTreeMap<String, usize>,
) -> BTreeMap<String, usize> {
    distribution
        .iter()
        .map(|(part, frac)| {
            let cap = (frac * total_cap as f64 - CAP_EPSILON).ceil().max(0.0) as usize;
            let cap = explicit.get(part).map_or(cap, |&m| cap.min(m));
            (part.clone(), cap)
        })
        .collect()
}

/// Keep at most the part's cap per part, lowest item_id first. Items from
/// parts missing in the distribution are dropped. Input order is preserved.
pub fn enforce_quota(
    items: &[McqItem],
    distribution: &BTreeMap<String, f64>,
    total_cap: usize,
) -> Result<Vec<McqItem>> {
    enforce_quota_with_caps(items, distribution, total_cap, &BTreeMap::new())
}

pub fn enforce_quota_with_caps(
    items: &[McqItem],
    distribution: &BTreeMap<String, f64>,
    total_cap: usize,
    explicit: &BTreeMap<String, usize>,
) -> Result<Vec<McqItem>> {
    let sum: f64 = distribution.values().sum();
    if (sum - 1.0).abs() > 1e-9 || distribution.values().any(|f| *f < 0.0) {
        return Err(Error::Precondition(format!(
            "distribution fractions must be non-negative and sum to 1 (got {sum})"
        )));
    }
    let caps = part_caps(distribution, total_cap, explicit);
    let mut by_part: BTreeMap<&str, Vec<&McqItem>> = BTreeMap::new();
    for it in items {
        by_part.entry(it.part_label.as_str()).or_default().push(it);
    }
    let mut keep: HashSet<&str> = HashSet::new();
    for (part, mut group) in by_part {
        let cap = caps.get(part).copied().unwrap_or(0);
        group.sort_by(|a, b| a.item_id.cmp(&b.item_id));
        keep.extend(group.into_iter().take(cap).map(|i| i.item_id.as_str()));
    }
    Ok(items
        .iter()
        .filter(|i| keep.contains(i.item_id.as_str()))
        .cloned()
        .collect())
}
