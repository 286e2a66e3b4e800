use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::GuidelineChunk;
use crate::error::{Error, Result};
use crate::text::tokens;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

/// Inverted index. Postings are sorted by chunk_id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalIndex {
    pub postings: BTreeMap<String, Vec<(String, u32)>>,
    pub doc_lengths: BTreeMap<String, usize>,
    pub avg_doc_length: f64,
    pub corpus_size: usize,
}

impl LexicalIndex {
    pub fn build(chunks: &[GuidelineChunk]) -> Result<Self> {
        if chunks.is_empty() {
            return Err(Error::EmptyInput("no chunks to index".into()));
        }
        let mut postings: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        let mut doc_lengths = BTreeMap::new();
        for c in chunks {
            let toks = tokens(&c.text);
            if doc_lengths.insert(c.chunk_id.clone(), toks.len()).is_some() {
                return Err(Error::Validation(format!("duplicate chunk_id {}", c.chunk_id)));
            }
            for t in toks {
                *postings
                    .entry(t)
                    .or_default()
                    .entry(c.chunk_id.clone())
                    .or_default() += 1;
            }
        }
        let corpus_size = doc_lengths.len();
        let avg_doc_length = doc_lengths.values().sum::<usize>() as f64 / corpus_size as f64;
        Ok(Self {
            postings: postings
                .into_iter()
                .map(|(t, docs)| (t, docs.into_iter().collect()))
                .collect(),
            doc_lengths,
            avg_doc_length,
            corpus_size,
        })
    }

    pub fn term_frequency(&self, term: &str, chunk_id: &str) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by(|(id, _)| id.as_str().cmp(chunk_id))
                    .ok()
                    .map(|i| list[i].1)
            })
            .unwrap_or(0)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// `ln((N - n + 0.5) / (n + 0.5) + 1)`; never negative.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.document_frequency(term) as f64;
        let total = self.corpus_size as f64;
        ((total - n + 0.5) / (n + 0.5) + 1.0).ln()
    }

    /// Chunks with a positive score, best first, ties by chunk_id.
    pub fn rank(&self, query_terms: &[String], params: Bm25Params) -> Vec<(String, f64)> {
        let candidates: BTreeSet<&str> = query_terms
            .iter()
            .filter_map(|t| self.postings.get(t))
            .flatten()
            .map(|(id, _)| id.as_str())
            .collect();
        let mut scored: Vec<(String, f64)> = candidates
            .into_iter()
            .filter_map(|id| {
                let s = bm25_score(query_terms, id, self, params).ok()?;
                (s > 0.0).then(|| (id.to_string(), s))
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored
    }
}

/// Okapi BM25 of `query_terms` (deduplicated) against one indexed chunk.
pub fn bm25_score(
    query_terms: &[String],
    chunk_id: &str,
    index: &LexicalIndex,
    params: Bm25Params,
) -> Result<f64> {
    let len = *index
        .doc_lengths
        .get(chunk_id)
        .ok_or_else(|| Error::NotFound(format!("chunk {chunk_id} is not indexed")))?
        as f64;
    let unique: BTreeSet<&str> = query_terms.iter().map(String::as_str).collect();
    let norm = params.k1 * (1.0 - params.b + params.b * len / index.avg_doc_length);
    Ok(unique
        .into_iter()
        .map(|t| {
            let tf = f64::from(index.term_frequency(t, chunk_id));
            if tf == 0.0 {
                0.0
            } else {
                index.idf(t) * tf * (params.k1 + 1.0) / (tf + norm)
            }
        })
        .sum())
}
