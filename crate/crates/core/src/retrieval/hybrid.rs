use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Bm25Params, Embedder, LexicalIndex, VectorIndex};
use crate::corpus::GuidelineChunk;
use crate::error::{Error, Result};
use crate::text::tokens;

/// Reciprocal rank fusion constant.
pub const RRF_K: f64 = 60.0;

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridIndex {
    pub lexical: LexicalIndex,
    pub vector: VectorIndex,
    #[serde(default)]
    pub bm25: Bm25Params,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format_version: u32,
    index: HybridIndex,
}

impl HybridIndex {
    pub fn save(&self, path: &Path) -> Result<()> {
        let snap = Snapshot {
            format_version: SNAPSHOT_VERSION,
            index: self.clone(),
        };
        let body = serde_json::to_vec(&snap).map_err(|e| Error::json("index snapshot", e))?;
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let snap: Snapshot =
            serde_json::from_slice(&body).map_err(|e| Error::json(path.display().to_string(), e))?;
        if snap.format_version != SNAPSHOT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported index snapshot version {}",
                snap.format_version
            )));
        }
        Ok(snap.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub chunk_id: String,
    pub lexical_rank: Option<usize>,
    pub vector_rank: Option<usize>,
    pub fused_score: f64,
    pub final_rank: usize,
}

pub fn build_indexes(chunks: &[GuidelineChunk], embedder: &dyn Embedder) -> Result<HybridIndex> {
    let lexical = LexicalIndex::build(chunks)?;
    let vector = VectorIndex::build(chunks, embedder)?;
    Ok(HybridIndex {
        lexical,
        vector,
        bm25: Bm25Params::default(),
    })
}

/// Top-k by reciprocal rank fusion of the BM25 and cosine rankings.
pub fn search(
    query: &str,
    k: usize,
    index: &HybridIndex,
    embedder: &dyn Embedder,
) -> Result<Vec<RetrievalResult>> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let terms = tokens(query);
    if terms.is_empty() {
        return Err(Error::EmptyInput("empty query".into()));
    }
    if embedder.id() != index.vector.embedder_id {
        return Err(Error::Config(format!(
            "query embedder {} differs from index embedder {}",
            embedder.id(),
            index.vector.embedder_id
        )));
    }
    let qv = embedder.embed(query)?;

    let mut fused: BTreeMap<String, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (rank, (id, _)) in index.lexical.rank(&terms, index.bm25).into_iter().enumerate() {
        fused.entry(id).or_default().0 = Some(rank + 1);
    }
    for (rank, (id, _)) in index.vector.rank(&qv).into_iter().enumerate() {
        fused.entry(id).or_default().1 = Some(rank + 1);
    }

    let mut results: Vec<RetrievalResult> = fused
        .into_iter()
        .map(|(chunk_id, (lex, vec))| {
            let fused_score = [lex, vec]
                .into_iter()
                .flatten()
                .map(|r| 1.0 / (RRF_K + r as f64))
                .sum();
            RetrievalResult {
                chunk_id,
                lexical_rank: lex,
                vector_rank: vec,
                fused_score,
                final_rank: 0,
            }
        })
        .collect();
    results.sort_by(|a, b| {
        b.fused_score
            .total_cmp(&a.fused_score)
            .then_with(|| a.chunk_id.cmp(&b.chunk_id))
    });
    results.truncate(k);
    for (i, r) in results.iter_mut().enumerate() {
        r.final_rank = i + 1;
    }
    Ok(results)
}
