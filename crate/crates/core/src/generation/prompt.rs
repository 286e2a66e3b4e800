use crate::error::{Error, Result};

use super::grammar::render_block;
use super::McqItem;

/// Item-generation prompt. `{n}` and `{paragraph}` are substituted.
pub const CASE_PROMPT: &str = "\
You are a Kenyan healthcare expert who is a post-doctorate level exam constructor.

Create {n} Kenyan healthcare training vignettes. For each vignette:

- 2-3-sentence scenario in a realistic Kenyan setting.
- ONE MCQ in the exact format–

Question: <question text>
A) <option>
B) <option>
C) <option>
D) <option>
Correct: <letter>

End every MCQ with “Correct:”.

Paragraph:
\"\"\"{paragraph}\"\"\"
";

const FENCE: &str = "\"\"\"";
const PARAGRAPH_HEADER: &str = "Paragraph:\n";

pub const TRANSLATION_INSTRUCTION: &str =
    "Translate the following multiple-choice question into Kiswahili.";

fn escape(paragraph: &str) -> String {
    paragraph.replace('\\', "\\\\").replace('"', "\\\"")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn build_case_prompt(n: usize, paragraph: &str) -> Result<String> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    if paragraph.trim().is_empty() {
        return Err(Error::Precondition("paragraph must be non-empty".into()));
    }
    Ok(CASE_PROMPT
        .replace("{n}", &n.to_string())
        .replace("{paragraph}", &escape(paragraph)))
}

/// Recover the paragraph embedded by [`build_case_prompt`].
pub fn extract_paragraph(prompt: &str) -> Option<String> {
    let marker = format!("{PARAGRAPH_HEADER}{FENCE}");
    let body = &prompt[prompt.find(&marker)? + marker.len()..];
    let end = body.rfind(FENCE)?;
    Some(unescape(&body[..end]))
}

/// Requested vignette count in a case prompt.
pub fn requested_count(prompt: &str) -> Option<usize> {
    let rest = &prompt[prompt.find("Create ")? + "Create ".len()..];
    rest.split_whitespace().next()?.parse().ok()
}

pub fn build_translation_prompt(item: &McqItem) -> String {
    format!(
        "{TRANSLATION_INSTRUCTION}\n\
         Keep the exact same format, the same option order and the same correct letter.\n\n{}",
        render_block(&super::grammar::ParsedBlock::from_item(item))
    )
}
