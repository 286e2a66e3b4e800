use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::audit::{audit_item, AuditOutcome};
use super::grammar::parse_mcq_output;
use super::prompt::build_case_prompt;
use super::quota::enforce_quota_with_caps;
use super::{Citation, ItemStatus, Language, McqItem};
use crate::corpus::{part_distribution, GuidelineChunk};
use crate::error::{Error, Result};
use crate::harness::{ModelAdapter, ModelRequest};
use crate::text::stable_id;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub n_per_chunk: usize,
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Total item budget shared across parts by content share; `None`
    /// disables quota enforcement.
    #[serde(default)]
    pub total_cap: Option<usize>,
    /// Optional hard per-part maxima.
    #[serde(default)]
    pub quota_caps: BTreeMap<String, usize>,
    #[serde(default = "default_translate_fraction")]
    pub translate_fraction: f64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_translate_fraction() -> f64 {
    0.10
}

fn default_parallelism() -> usize {
    4
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            n_per_chunk: 1,
            temperature: None,
            total_cap: None,
            quota_caps: BTreeMap::new(),
            translate_fraction: default_translate_fraction(),
            parallelism: default_parallelism(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub items: Vec<McqItem>,
    /// Per-chunk failures, parse diagnostics and audit rejections.
    pub diagnostics: Vec<String>,
}

struct ChunkResult {
    items: Vec<McqItem>,
    diagnostics: Vec<String>,
    failed: bool,
}

fn generate_for_chunk(
    chunk: &GuidelineChunk,
    backend: &dyn ModelAdapter,
    cfg: &GenerationConfig,
    guideline_version: &str,
) -> ChunkResult {
    let mut res = ChunkResult {
        items: Vec::new(),
        diagnostics: Vec::new(),
        failed: false,
    };
    let fail = |mut res: ChunkResult, msg: String| {
        warn!(chunk = %chunk.chunk_id, "{msg}");
        res.diagnostics.push(format!("{}: {msg}", chunk.chunk_id));
        res.failed = true;
        res
    };
    let prompt = match build_case_prompt(cfg.n_per_chunk, &chunk.text) {
        Ok(p) => p,
        Err(e) => return fail(res, e.to_string()),
    };
    let mut req = ModelRequest::single(format!("generate:{}", chunk.chunk_id), prompt);
    req.temperature = cfg.temperature;
    let resp = match backend.respond(&req) {
        Ok(r) => r,
        Err(e) => return fail(res, e.to_string()),
    };
    let parsed = match parse_mcq_output(&resp.text) {
        Ok(p) => p,
        Err(Error::McqParse(diags)) => {
            let detail = diags
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            return fail(res, format!("unparseable output: {detail}"));
        }
        Err(e) => return fail(res, e.to_string()),
    };
    for d in &parsed.diagnostics {
        res.diagnostics.push(format!("{}: skipped block, {d}", chunk.chunk_id));
    }
    for (i, block) in parsed.blocks.into_iter().take(cfg.n_per_chunk).enumerate() {
        let draft = McqItem {
            item_id: stable_id("itm", &[&chunk.chunk_id, &i.to_string()]),
            question: block.question,
            options: block.options,
            correct: block.correct,
            explanation: block.explanation.unwrap_or_default(),
            citation: Citation {
                chunk_id: chunk.chunk_id.clone(),
                page_start: chunk.page_start,
                page_end: chunk.page_end,
            },
            language: Language::En,
            part_label: chunk.part_label().to_string(),
            guideline_version: guideline_version.to_string(),
            status: ItemStatus::Draft,
            source_item_id: None,
            source: Default::default(),
        };
        match audit_item(&draft, chunk) {
            Ok(AuditOutcome::Passed { item }) => res.items.push(item),
            Ok(AuditOutcome::Rejected { item_id, reasons }) => res
                .diagnostics
                .push(format!("{}: {item_id} rejected: {}", chunk.chunk_id, reasons.join(", "))),
            Err(e) => res.diagnostics.push(format!("{}: {e}", chunk.chunk_id)),
        }
    }
    res
}

/// Prompt → backend → parse → audit for every chunk, then quota. Chunk
/// failures are logged and skipped; the batch fails only when every chunk
/// fails.
pub fn generate_batch(
    chunks: &[GuidelineChunk],
    backend: &dyn ModelAdapter,
    cfg: &GenerationConfig,
    guideline_version: &str,
) -> Result<BatchOutcome> {
    if chunks.is_empty() {
        return Err(Error::EmptyInput("no chunks to generate from".into()));
    }
    if cfg.n_per_chunk == 0 {
        return Err(Error::Config("n_per_chunk must be at least 1".into()));
    }
    let slots: Vec<Mutex<Option<ChunkResult>>> = chunks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.parallelism.clamp(1, chunks.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= chunks.len() {
                    break;
                }
                let r = generate_for_chunk(&chunks[i], backend, cfg, guideline_version);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });

    let mut outcome = BatchOutcome::default();
    let mut failures = 0;
    for slot in slots {
        let r = slot.into_inner().expect("slot lock").expect("every chunk processed");
        failures += usize::from(r.failed);
        outcome.items.extend(r.items);
        outcome.diagnostics.extend(r.diagnostics);
    }
    if failures == chunks.len() {
        return Err(Error::BatchFailed(failures));
    }
    if let Some(total) = cfg.total_cap {
        let dist = part_distribution(chunks)?;
        let before = outcome.items.len();
        outcome.items = enforce_quota_with_caps(&outcome.items, &dist, total, &cfg.quota_caps)?;
        if outcome.items.len() < before {
            outcome.diagnostics.push(format!(
                "quota retained {} of {before} items",
                outcome.items.len()
            ));
        }
    } else if !cfg.quota_caps.is_empty() {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        outcome.items.retain(|it| {
            let n = counts.entry(it.part_label.clone()).or_default();
            *n += 1;
            cfg.quota_caps.get(&it.part_label).is_none_or(|cap| *n <= *cap)
        });
    }
    Ok(outcome)
}

/// Deterministic subset for translation: the first `round(fraction × n)`
/// items by item_id.
pub fn select_for_translation(items: &[McqItem], fraction: f64) -> Vec<&McqItem> {
    let mut eligible: Vec<&McqItem> = items
        .iter()
        .filter(|i| i.language == Language::En)
        .collect();
    eligible.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    let n = (fraction.clamp(0.0, 1.0) * eligible.len() as f64).round() as usize;
    eligible.truncate(n);
    eligible
}
