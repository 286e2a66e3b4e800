use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ItemStatus, Language, McqItem};
use crate::corpus::GuidelineChunk;
use crate::error::{Error, Result};
use crate::text::{content_tokens, tokens};

const IMPERATIVE_STEMS: &[&str] = &[
    "choose", "complete", "determine", "give", "identify", "indicate", "list", "mark", "name",
    "pick", "select", "state",
];

const SWAHILI_FUNCTION_WORDS: &[&str] = &[
    "ambaye", "ambayo", "au", "baada", "bila", "cha", "gani", "hadi", "hakuna", "hii", "huyu",
    "je", "juu", "kabla", "kama", "katika", "kuhusu", "kuna", "kwa", "kwamba", "la", "lakini",
    "mgonjwa", "mtoto", "na", "ni", "nini", "pia", "sana", "tu", "wa", "wakati", "ya", "yake",
    "yupi", "za",
];

/// Fraction of tokens that must be Swahili function words to detect Swahili.
pub const SWAHILI_THRESHOLD: f64 = 0.2;

pub fn detect_language(text: &str) -> Language {
    let toks = tokens(text);
    if toks.is_empty() {
        return Language::En;
    }
    let hits = toks
        .iter()
        .filter(|t| SWAHILI_FUNCTION_WORDS.binary_search(&t.as_str()).is_ok())
        .count();
    if hits as f64 / toks.len() as f64 >= SWAHILI_THRESHOLD {
        Language::Sw
    } else {
        Language::En
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AuditOutcome {
    Passed { item: McqItem },
    Rejected { item_id: String, reasons: Vec<String> },
}

fn is_stem(question: &str) -> bool {
    let q = question.trim();
    q.ends_with('?')
        || tokens(q)
            .first()
            .is_some_and(|w| IMPERATIVE_STEMS.contains(&w.as_str()))
}

/// First-pass faithfulness and form checks on a draft item.
pub fn audit_item(item: &McqItem, chunk: &GuidelineChunk) -> Result<AuditOutcome> {
    if item.status != ItemStatus::Draft {
        return Err(Error::Precondition(format!(
            "item {} is {}, audit needs draft",
            item.item_id, item.status
        )));
    }
    let mut reasons = Vec::new();

    if item.question.trim().is_empty() {
        reasons.push("empty question".to_string());
    } else if !is_stem(&item.question) {
        reasons.push("question is neither interrogative nor an imperative stem".to_string());
    }

    let normalized: Vec<String> = item
        .options
        .iter()
        .map(|(_, t)| tokens(t).join(" "))
        .collect();
    if normalized.iter().any(String::is_empty) {
        reasons.push("empty option".to_string());
    }
    let distinct: BTreeSet<&String> = normalized.iter().filter(|s| !s.is_empty()).collect();
    if distinct.len() < normalized.iter().filter(|s| !s.is_empty()).count() {
        reasons.push("duplicate options".to_string());
    }

    if item.citation.chunk_id != chunk.chunk_id {
        reasons.push(format!(
            "citation {} does not match chunk {}",
            item.citation.chunk_id, chunk.chunk_id
        ));
    }
    let answer = content_tokens(item.correct_text());
    let source = content_tokens(&chunk.text);
    if answer.intersection(&source).next().is_none() {
        reasons.push("correct answer shares no content token with the cited chunk".to_string());
    }

    let all_text = std::iter::once(item.question.as_str())
        .chain(item.options.iter().map(|(_, t)| t))
        .collect::<Vec<_>>()
        .join(" ");
    let detected = detect_language(&all_text);
    if detected != item.language {
        reasons.push(format!(
            "language tag {} does not match detected {}",
            item.language, detected
        ));
    }

    if reasons.is_empty() {
        let mut audited = item.clone();
        audited.transition(ItemStatus::Audited)?;
        Ok(AuditOutcome::Passed { item: audited })
    } else {
        Ok(AuditOutcome::Rejected {
            item_id: item.item_id.clone(),
            reasons,
        })
    }
}
