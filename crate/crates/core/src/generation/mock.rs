use super::grammar::{parse_lenient, render_block, ParsedBlock};
use super::prompt::{extract_paragraph, requested_count, TRANSLATION_INSTRUCTION};
use super::{Letter, Options};
use crate::error::{Error, Result};
use crate::harness::{ModelAdapter, ModelRequest, ModelResponse};
use crate::text::{content_tokens, fnv1a64, sentences, tokens};

const DISTRACTORS: [&str; 3] = [
    "Refer immediately without any assessment",
    "Defer all treatment until laboratory confirmation",
    "No intervention is recommended at this level",
];

/// Offline generation backend. Builds items from the prompt's own
/// paragraph so output is deterministic and source-backed; answers
/// translation prompts with a marked Kiswahili rendering.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateGenerator;

impl TemplateGenerator {
    fn item_for(sentence: &str) -> ParsedBlock {
        let words: Vec<&str> = sentence.split_whitespace().take(12).collect();
        let answer = words
            .join(" ")
            .trim_end_matches(['.', ',', ';', ':'])
            .to_string();
        let topic: Vec<String> = tokens(sentence)
            .into_iter()
            .filter(|t| content_tokens(t).contains(t))
            .take(3)
            .collect();
        let correct = Letter::ALL[(fnv1a64(sentence.as_bytes()) % 4) as usize];
        let mut distractors = DISTRACTORS.iter();
        let opts = Letter::ALL.map(|l| {
            if l == correct {
                answer.clone()
            } else {
                distractors.next().unwrap().to_string()
            }
        });
        ParsedBlock {
            question: format!(
                "According to the guideline, which statement is correct regarding {}?",
                topic.join(" ")
            ),
            options: Options::from_array(opts),
            correct,
            explanation: None,
        }
    }

    fn translate(prompt: &str) -> Result<String> {
        let block = parse_lenient(prompt)
            .blocks
            .into_iter()
            .next()
            .ok_or_else(|| Error::backend("translation prompt carries no MCQ block", false))?;
        Ok(render_block(&ParsedBlock {
            question: format!("Je, {} (kwa Kiswahili)", block.question),
            ..block
        }))
    }
}

impl ModelAdapter for TemplateGenerator {
    fn id(&self) -> &str {
        "template-mock"
    }

    fn respond(&self, req: &ModelRequest) -> Result<ModelResponse> {
        let prompt = req.last_harness_text();
        if prompt.starts_with(TRANSLATION_INSTRUCTION) {
            return Self::translate(prompt).map(ModelResponse::text);
        }
        let paragraph = extract_paragraph(prompt)
            .ok_or_else(|| Error::backend("prompt carries no paragraph", false))?;
        let n = requested_count(prompt).unwrap_or(1).max(1);
        let sents: Vec<&str> = sentences(&paragraph)
            .into_iter()
            .filter(|s| !content_tokens(s).is_empty())
            .collect();
        if sents.is_empty() {
            return Err(Error::backend("paragraph has no usable sentence", false));
        }
        let mut out = String::new();
        for i in 0..n {
            out.push_str(&format!(
                "Vignette {}: a patient presents at a rural dispensary.\n",
                i + 1
            ));
            out.push_str(&render_block(&Self::item_for(sents[i % sents.len()])));
            out.push('\n');
        }
        Ok(ModelResponse::text(out))
    }
}
