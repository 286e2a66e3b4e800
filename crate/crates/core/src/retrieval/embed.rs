use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{fnv1a64, tokens};

pub const HASH_EMBEDDER_DIM: usize = 256;

/// Text → unit vector. Implementations must be deterministic per text for
/// reproducible indexes.
pub trait Embedder: Send + Sync {
    fn id(&self) -> &str;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>>;

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.embed_batch(&[text])?
            .pop()
            .ok_or_else(|| Error::backend("embedder returned no vector", false))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn normalize(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::EmptyInput("cannot normalize a zero vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// Bag of FNV-1a hashed tokens in 256 buckets, L2-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashEmbedder;

impl HashEmbedder {
    pub fn vector(text: &str) -> Result<Vec<f64>> {
        let toks = tokens(text);
        if toks.is_empty() {
            return Err(Error::EmptyInput("text has no tokens to embed".into()));
        }
        let mut v = vec![0.0; HASH_EMBEDDER_DIM];
        for t in toks {
            v[(fnv1a64(t.as_bytes()) % HASH_EMBEDDER_DIM as u64) as usize] += 1.0;
        }
        normalize(v)
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> &str {
        "fnv1a-bag-256"
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        texts.iter().map(|t| Self::vector(t)).collect()
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// External embedding service: POST `{"texts": [...]}` → `{"vectors": [[...]]}`.
pub struct HttpEmbedder {
    id: String,
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(endpoint: &str, api_key: Option<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            id: format!("http:{endpoint}"),
            endpoint: endpoint.to_string(),
            api_key,
            client,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        if texts.iter().any(|t| tokens(t).is_empty()) {
            return Err(Error::EmptyInput("text has no tokens to embed".into()));
        }
        let mut req = self.client.post(&self.endpoint).json(&EmbedRequest { texts });
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            Error::backend(format!("embedding transport failure: {e}; retry later"), true)
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::backend(
                format!("embedding service returned {status}"),
                status.is_server_error(),
            ));
        }
        let body: EmbedResponse = resp
            .json()
            .map_err(|e| Error::backend(format!("bad embedding response: {e}"), false))?;
        if body.vectors.len() != texts.len() {
            return Err(Error::backend(
                format!(
                    "embedding service returned {} vectors for {} texts",
                    body.vectors.len(),
                    texts.len()
                ),
                false,
            ));
        }
        body.vectors.into_iter().map(normalize).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norm_and_identity() {
        let a = HashEmbedder::vector("Severe pneumonia in a child").unwrap();
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let b = HashEmbedder::vector("Severe pneumonia in a child").unwrap();
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn order_invariant_bag() {
        let a = HashEmbedder::vector("malaria fever child").unwrap();
        let b = HashEmbedder::vector("child fever malaria").unwrap();
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_tokens_are_orthogonal() {
        // Bucket collisions checked: these six tokens land in distinct buckets.
        let buckets: Vec<u64> = ["malaria", "fever", "child", "fracture", "wrist", "cast"]
            .iter()
            .map(|t| fnv1a64(t.as_bytes()) % 256)
            .collect();
        let mut dedup = buckets.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), buckets.len());
        let a = HashEmbedder::vector("malaria fever child").unwrap();
        let b = HashEmbedder::vector("fracture wrist cast").unwrap();
        assert_eq!(cosine(&a, &b), 0.0);
    }

    #[test]
    fn empty_text_rejected() {
        assert!(matches!(HashEmbedder::vector(" ,, "), Err(Error::EmptyInput(_))));
    }
}
