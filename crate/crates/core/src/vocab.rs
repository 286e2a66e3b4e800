//! Local concept vocabulary: labels with synonyms, standing in for a
//! coded terminology. Used for label normalization and for extracting
//! concepts from free text.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::tokens;

const BUNDLED: &str = include_str!("../data/vocabulary.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub label: String,
    #[serde(default)]
    pub kinds: Vec<String>,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

impl Concept {
    pub fn has_kind(&self, kind: &str) -> bool {
        self.kinds.iter().any(|k| k == kind)
    }
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    concepts: Vec<Concept>,
    /// Surface token sequence → concept index; longest sequences first.
    surfaces: Vec<(Vec<String>, usize)>,
    by_surface: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(concepts: Vec<Concept>) -> Result<Self> {
        let mut surfaces = Vec::new();
        let mut by_surface = HashMap::new();
        for (i, c) in concepts.iter().enumerate() {
            for s in std::iter::once(&c.label).chain(&c.synonyms) {
                let toks = tokens(s);
                if toks.is_empty() {
                    return Err(Error::Validation(format!(
                        "concept {} has an empty surface form",
                        c.label
                    )));
                }
                let key = toks.join(" ");
                if let Some(prev) = by_surface.insert(key.clone(), i) {
                    if prev != i {
                        return Err(Error::Validation(format!(
                            "surface form `{key}` maps to both {} and {}",
                            concepts[prev].label, c.label
                        )));
                    }
                }
                surfaces.push((toks, i));
            }
        }
        surfaces.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)));
        Ok(Self {
            concepts,
            surfaces,
            by_surface,
        })
    }

    pub fn bundled() -> Self {
        let concepts: Vec<Concept> =
            serde_json::from_str(BUNDLED).expect("bundled vocabulary is valid JSON");
        Self::new(concepts).expect("bundled vocabulary is consistent")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let concepts = serde_json::from_str(&body)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        Self::new(concepts)
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn lookup(&self, surface: &str) -> Option<&Concept> {
        self.by_surface
            .get(&tokens(surface).join(" "))
            .map(|&i| &self.concepts[i])
    }

    /// Lowercase, token-normalize and fold synonyms onto their concept label.
    pub fn normalize(&self, label: &str) -> String {
        match self.lookup(label) {
            Some(c) => tokens(&c.label).join(" "),
            None => tokens(label).join(" "),
        }
    }

    /// True if `text` mentions `label` or any synonym of its concept.
    pub fn mentions(&self, text: &str, label: &str) -> bool {
        let toks = tokens(text);
        let label_toks = tokens(label);
        if !label_toks.is_empty() && crate::text::contains_token_seq(&toks, &label_toks) {
            return true;
        }
        match self.lookup(label) {
            Some(c) => std::iter::once(&c.label)
                .chain(&c.synonyms)
                .any(|s| crate::text::contains_token_seq(&toks, &tokens(s))),
            None => false,
        }
    }

    /// Concept labels mentioned in `text`, in order of first mention.
    /// Longest surface forms win; matches never overlap.
    pub fn extract(&self, text: &str, kind: Option<&str>) -> Vec<String> {
        let toks = tokens(text);
        let mut found: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let hit = self.surfaces.iter().find(|(s, ci)| {
                kind.is_none_or(|k| self.concepts[*ci].has_kind(k))
                    && toks.len() - i >= s.len()
                    && toks[i..i + s.len()] == s[..]
            });
            match hit {
                Some((s, ci)) => {
                    if !found.contains(ci) {
                        found.push(*ci);
                    }
                    i += s.len();
                }
                None => i += 1,
            }
        }
        found
            .into_iter()
            .map(|ci| self.concepts[ci].label.clone())
            .collect()
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::bundled()
    }
}
