use std::collections::BTreeSet;

use regex::{Regex, RegexBuilder};

use crate::error::{Error, Result};
use crate::retrieval::{cosine, Embedder};
use crate::scenario::Node;
use crate::text::{content_tokens, contains_token_seq, tokens};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.75;

/// Embedding input: content tokens only, so question scaffolding
/// ("what is the") does not dilute similarity.
pub fn embedding_text(text: &str) -> String {
    content_tokens(text).into_iter().collect::<Vec<_>>().join(" ")
}

struct Compiled {
    node_id: String,
    patterns: Vec<Regex>,
    surfaces: Vec<Vec<String>>,
    label_vec: Option<Vec<f64>>,
}

/// Matches model queries against a vignette's hidden nodes.
pub struct NodeMatcher<'a> {
    nodes: Vec<Compiled>,
    embedder: &'a dyn Embedder,
    threshold: f64,
}

impl<'a> NodeMatcher<'a> {
    pub fn new(nodes: &[Node], embedder: &'a dyn Embedder, threshold: f64) -> Result<Self> {
        let mut compiled = Vec::with_capacity(nodes.len());
        for n in nodes {
            let patterns = n
                .patterns
                .iter()
                .map(|p| {
                    RegexBuilder::new(p)
                        .case_insensitive(true)
                        .build()
                        .map_err(|e| Error::Validation(format!("node {}: {e}", n.node_id)))
                })
                .collect::<Result<Vec<_>>>()?;
            let surfaces = std::iter::once(&n.label)
                .chain(&n.synonyms)
                .map(|s| tokens(s))
                .filter(|t| !t.is_empty())
                .collect();
            let label_text = embedding_text(&n.label);
            let label_vec = if label_text.is_empty() {
                None
            } else {
                Some(embedder.embed(&label_text)?)
            };
            compiled.push(Compiled {
                node_id: n.node_id.clone(),
                patterns,
                surfaces,
                label_vec,
            });
        }
        Ok(Self {
            nodes: compiled,
            embedder,
            threshold,
        })
    }

    /// Every node the query matches, in node order.
    pub fn matches(&self, query: &str) -> Result<Vec<String>> {
        let toks = tokens(query);
        let q_text = embedding_text(query);
        let q_vec = if q_text.is_empty() {
            None
        } else {
            Some(self.embedder.embed(&q_text)?)
        };
        Ok(self
            .nodes
            .iter()
            .filter(|n| {
                n.patterns.iter().any(|p| p.is_match(query))
                    || n.surfaces.iter().any(|s| contains_token_seq(&toks, s))
                    || matches!((&q_vec, &n.label_vec), (Some(q), Some(l)) if cosine(q, l) >= self.threshold)
            })
            .map(|n| n.node_id.clone())
            .collect())
    }

    /// Matches not already in `seen`; records them there.
    pub fn first_matches(&self, query: &str, seen: &mut BTreeSet<String>) -> Result<Vec<String>> {
        Ok(self
            .matches(query)?
            .into_iter()
            .filter(|id| seen.insert(id.clone()))
            .collect())
    }
}

pub fn match_query_to_nodes(
    query: &str,
    nodes: &[Node],
    embedder: &dyn Embedder,
    threshold: f64,
) -> Result<Vec<String>> {
    NodeMatcher::new(nodes, embedder, threshold)?.matches(query)
}

/// Cut `text` to at most `cap` whitespace-separated tokens.
pub fn truncate_tokens(text: &str, cap: usize) -> (String, bool) {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= cap {
        (text.trim().to_string(), false)
    } else {
        (words[..cap].join(" "), true)
    }
}
