use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{cosine, Embedder};
use crate::corpus::GuidelineChunk;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorIndex {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
    pub embedder_id: String,
}

impl VectorIndex {
    pub fn build(chunks: &[GuidelineChunk], embedder: &dyn Embedder) -> Result<Self> {
        let mut vectors = BTreeMap::new();
        let mut dim = None;
        for c in chunks {
            let v = embedder.embed(&c.text).map_err(|e| Error::IndexBuild {
                chunk_id: c.chunk_id.clone(),
                source: Box::new(e),
            })?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::IndexBuild {
                        chunk_id: c.chunk_id.clone(),
                        source: Box::new(Error::backend(
                            format!("dimension {} differs from {d}", v.len()),
                            false,
                        )),
                    })
                }
                _ => {}
            }
            if vectors.insert(c.chunk_id.clone(), v).is_some() {
                return Err(Error::Validation(format!("duplicate chunk_id {}", c.chunk_id)));
            }
        }
        Ok(Self {
            dim: dim.unwrap_or(0),
            vectors,
            embedder_id: embedder.id().to_string(),
        })
    }

    /// Every chunk, best cosine first, ties by chunk_id.
    pub fn rank(&self, query: &[f64]) -> Vec<(String, f64)> {
        let mut scored: Vec<(String, f64)> = self
            .vectors
            .iter()
            .map(|(id, v)| (id.clone(), cosine(query, v)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored
    }
}
