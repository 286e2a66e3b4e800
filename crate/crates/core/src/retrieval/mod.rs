//! Hybrid lexical (BM25) + vector retrieval over guideline chunks, fused
//! with reciprocal rank fusion.

mod embed;
mod hybrid;
mod lexical;
mod vector;

pub use embed::{cosine, Embedder, HashEmbedder, HttpEmbedder, HASH_EMBEDDER_DIM};
pub use hybrid::{build_indexes, search, HybridIndex, RetrievalResult, RRF_K};
pub use lexical::{bm25_score, Bm25Params, LexicalIndex};
pub use vector::VectorIndex;
