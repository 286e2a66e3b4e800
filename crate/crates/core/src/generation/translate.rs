use super::grammar::parse_lenient;
use super::prompt::build_translation_prompt;
use super::{ItemStatus, Language, McqItem};
use crate::error::{Error, Result};
use crate::harness::{ModelAdapter, ModelRequest};
use crate::text::stable_id;

/// Produce a Kiswahili variant of an audited or accepted English item. The
/// variant keeps citation, part and correct letter, links back to its
/// source, and enters review directly.
pub fn translate_item(item: &McqItem, backend: &dyn ModelAdapter) -> Result<McqItem> {
    if item.language != Language::En {
        return Err(Error::Precondition(format!(
            "item {} is not English",
            item.item_id
        )));
    }
    if !matches!(item.status, ItemStatus::Audited | ItemStatus::Accepted) {
        return Err(Error::Precondition(format!(
            "item {} is {}, translation needs audited or accepted",
            item.item_id, item.status
        )));
    }
    let req = ModelRequest::single(
        format!("translate:{}", item.item_id),
        build_translation_prompt(item),
    );
    let resp = backend.respond(&req)?;
    let parsed = parse_lenient(&resp.text);
    let block = match (parsed.blocks.len(), parsed.diagnostics.first()) {
        (1, _) => parsed.blocks.into_iter().next().unwrap(),
        (0, Some(d)) => return Err(Error::TranslationParse(d.to_string())),
        (0, None) => return Err(Error::TranslationParse("no MCQ block in response".into())),
        (n, _) => {
            return Err(Error::TranslationParse(format!(
                "expected exactly one block, got {n}"
            )))
        }
    };
    if block.correct != item.correct {
        return Err(Error::TranslationParse(format!(
            "correct letter changed from {} to {}",
            item.correct, block.correct
        )));
    }
    Ok(McqItem {
        item_id: stable_id("itm", &[&item.item_id, "sw"]),
        question: block.question,
        options: block.options,
        correct: item.correct,
        explanation: block.explanation.unwrap_or_default(),
        citation: item.citation.clone(),
        language: Language::Sw,
        part_label: item.part_label.clone(),
        guideline_version: item.guideline_version.clone(),
        status: ItemStatus::InReview,
        source_item_id: Some(item.item_id.clone()),
        source: item.source,
    })
}
