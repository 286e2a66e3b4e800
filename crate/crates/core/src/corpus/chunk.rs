use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{content_hash, Block, GuidelineChunk, GuidelineDoc};
use crate::error::{Error, Result};
use crate::text::{sentences, stable_id, word_count};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkConfig {
    pub min_words: usize,
    pub max_words: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            min_words: 40,
            max_words: 400,
        }
    }
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_words < 1 || self.max_words < self.min_words {
            return Err(Error::Config(format!(
                "chunk sizes need max_words >= min_words >= 1 (got min {}, max {})",
                self.min_words, self.max_words
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Piece {
    text: String,
    words: usize,
    page_start: u32,
    page_end: u32,
}

#[derive(Debug, Clone)]
struct Draft {
    path: Vec<String>,
    pieces: Vec<Piece>,
}

impl Draft {
    fn words(&self) -> usize {
        self.pieces.iter().map(|p| p.words).sum()
    }

    /// Part and section; subsections of one section share a scope.
    fn scope(&self) -> &[String] {
        &self.path[..self.path.len().min(2)]
    }
}

/// Split a paragraph longer than `max_words` at sentence boundaries. A
/// single sentence longer than the limit stays whole.
fn split_paragraph(text: &str, page_start: u32, page_end: u32, max_words: usize) -> Vec<Piece> {
    let words = word_count(text);
    if words <= max_words {
        return vec![Piece {
            text: text.to_string(),
            words,
            page_start,
            page_end,
        }];
    }
    let mut out: Vec<Piece> = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    let mut cur_words = 0;
    for s in sentences(text) {
        let w = word_count(s);
        if !cur.is_empty() && cur_words + w > max_words {
            out.push(Piece {
                text: cur.join(" "),
                words: cur_words,
                page_start,
                page_end,
            });
            cur.clear();
            cur_words = 0;
        }
        cur.push(s);
        cur_words += w;
    }
    if !cur.is_empty() {
        out.push(Piece {
            text: cur.join(" "),
            words: cur_words,
            page_start,
            page_end,
        });
    }
    out
}

fn common_prefix(a: &[String], b: &[String]) -> Vec<String> {
    a.iter()
        .zip(b)
        .take_while(|(x, y)| x == y)
        .map(|(x, _)| x.clone())
        .collect()
}

/// Chunk a parsed guideline. Units start at every heading; oversized
/// paragraphs split at sentence boundaries; undersized neighbours inside
/// one section merge while the result stays within `max_words`.
pub fn chunk_document(doc: &GuidelineDoc, cfg: ChunkConfig) -> Result<Vec<GuidelineChunk>> {
    cfg.validate()?;
    if doc.doc_id.trim().is_empty() {
        return Err(Error::Validation("doc_id must be non-empty".into()));
    }
    if doc.version_tag.trim().is_empty() {
        return Err(Error::Validation("version_tag must be non-empty".into()));
    }

    // Units per heading.
    let mut units: Vec<Draft> = Vec::new();
    let mut path: Vec<String> = Vec::new();
    for block in &doc.blocks {
        match block {
            Block::Heading { level, title } => {
                path.truncate(level - 1);
                path.push(title.clone());
                units.push(Draft {
                    path: path.clone(),
                    pieces: Vec::new(),
                });
            }
            Block::Paragraph {
                text,
                page_start,
                page_end,
            } => {
                let Some(unit) = units.last_mut() else {
                    return Err(Error::Validation("paragraph outside any part".into()));
                };
                unit.pieces.extend(split_paragraph(
                    text,
                    *page_start,
                    *page_end,
                    cfg.max_words,
                ));
            }
        }
    }
    if units.iter().all(|u| u.pieces.is_empty()) {
        return Err(Error::EmptyInput("document has no body text".into()));
    }

    // Greedy packing inside each unit.
    let mut packed: Vec<Draft> = Vec::new();
    for unit in units.into_iter().filter(|u| !u.pieces.is_empty()) {
        let mut cur = Draft {
            path: unit.path.clone(),
            pieces: Vec::new(),
        };
        for piece in unit.pieces {
            if !cur.pieces.is_empty() && cur.words() + piece.words > cfg.max_words {
                packed.push(std::mem::replace(
                    &mut cur,
                    Draft {
                        path: unit.path.clone(),
                        pieces: Vec::new(),
                    },
                ));
            }
            cur.pieces.push(piece);
        }
        packed.push(cur);
    }

    // Merge undersized neighbours within a section.
    let mut merged: Vec<Draft> = Vec::new();
    for draft in packed {
        if let Some(last) = merged.last_mut() {
            let small = last.words() < cfg.min_words || draft.words() < cfg.min_words;
            if small
                && last.scope() == draft.scope()
                && last.words() + draft.words() <= cfg.max_words
            {
                last.path = common_prefix(&last.path, &draft.path);
                last.pieces.extend(draft.pieces);
                continue;
            }
        }
        merged.push(draft);
    }

    let mut ordinals: HashMap<Vec<String>, usize> = HashMap::new();
    let chunks = merged
        .into_iter()
        .map(|d| {
            let ordinal = ordinals.entry(d.path.clone()).or_insert(0);
            let chunk_id = stable_id(
                "chk",
                &[&doc.doc_id, &d.path.join("\u{1e}"), &ordinal.to_string()],
            );
            *ordinal += 1;
            let text = d
                .pieces
                .iter()
                .map(|p| p.text.as_str())
                .collect::<Vec<_>>()
                .join("\n\n");
            GuidelineChunk {
                chunk_id,
                doc_id: doc.doc_id.clone(),
                page_start: d.pieces.iter().map(|p| p.page_start).min().unwrap_or(1),
                page_end: d.pieces.iter().map(|p| p.page_end).max().unwrap_or(1),
                word_count: word_count(&text),
                content_hash: content_hash(&text),
                section_path: d.path,
                text,
            }
        })
        .collect();
    Ok(chunks)
}

/// Fraction of total word count per part label.
pub fn part_distribution(chunks: &[GuidelineChunk]) -> Result<BTreeMap<String, f64>> {
    if chunks.is_empty() {
        return Err(Error::EmptyInput("no chunks".into()));
    }
    let mut words: BTreeMap<String, usize> = BTreeMap::new();
    for c in chunks {
        *words.entry(c.part_label().to_string()).or_default() += c.word_count;
    }
    let total: usize = words.values().sum();
    if total == 0 {
        return Err(Error::EmptyInput("chunks contain no words".into()));
    }
    Ok(words
        .into_iter()
        .map(|(k, w)| (k, w as f64 / total as f64))
        .collect())
}
