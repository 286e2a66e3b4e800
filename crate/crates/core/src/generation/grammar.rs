//! Strict MCQ output grammar:
//!
//! ```text
//! Question: <question text>
//! A) <option>
//! B) <option>
//! C) <option>
//! D) <option>
//! Explanation: <optional>
//! Correct: <letter>
//! ```
//!
//! Lines outside a block are ignored. Parsing is one forward pass; a block
//! that breaks a rule is dropped with a diagnostic naming the first rule it
//! broke.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Letter, McqItem, Options};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedBlock {
    pub question: String,
    pub options: Options,
    pub correct: Letter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
}

impl ParsedBlock {
    pub fn from_item(item: &McqItem) -> Self {
        Self {
            question: item.question.clone(),
            options: item.options.clone(),
            correct: item.correct,
            explanation: (!item.explanation.is_empty()).then(|| item.explanation.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseRule {
    EmptyQuestion,
    MissingOption(Letter),
    EmptyOption(Letter),
    MissingCorrectTerminator,
    InvalidCorrectLetter,
}

impl fmt::Display for ParseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseRule::EmptyQuestion => f.write_str("empty question"),
            ParseRule::MissingOption(l) => write!(f, "missing option {l}"),
            ParseRule::EmptyOption(l) => write!(f, "empty option {l}"),
            ParseRule::MissingCorrectTerminator => f.write_str("missing Correct terminator"),
            ParseRule::InvalidCorrectLetter => f.write_str("invalid Correct letter"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    /// 1-based line where the rule was found broken.
    pub line: usize,
    /// Line where the offending block started.
    pub block_line: usize,
    pub rule: ParseRule,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {} (block at line {}): {}",
            self.line, self.block_line, self.rule
        )
    }
}

#[derive(Debug, Default)]
pub struct ParseOutput {
    pub blocks: Vec<ParsedBlock>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

struct Open {
    start: usize,
    question: String,
    options: Vec<String>,
    explanation: Option<String>,
}

impl Open {
    fn incomplete_rule(&self) -> ParseRule {
        if self.options.len() < 4 {
            ParseRule::MissingOption(Letter::ALL[self.options.len()])
        } else {
            ParseRule::MissingCorrectTerminator
        }
    }
}

fn parse_correct(rest: &str) -> Option<Letter> {
    let t = rest.trim();
    let t = t.strip_suffix(')').or_else(|| t.strip_suffix('.')).unwrap_or(t);
    let mut chars = t.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    Letter::from_char(c)
}

/// Parse raw backend output. Fails only when no block is well formed.
pub fn parse_mcq_output(raw: &str) -> Result<ParseOutput> {
    let out = parse_lenient(raw);
    if out.blocks.is_empty() {
        return Err(Error::McqParse(out.diagnostics));
    }
    Ok(out)
}

/// Like [`parse_mcq_output`] but returns an empty result instead of an error.
pub fn parse_lenient(raw: &str) -> ParseOutput {
    let mut out = ParseOutput::default();
    let mut open: Option<Open> = None;

    fn fail(out: &mut ParseOutput, line: usize, block: &Open, rule: ParseRule) {
        out.diagnostics.push(ParseDiagnostic {
            line,
            block_line: block.start,
            rule,
        });
    }

    for (idx, raw_line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();

        if let Some(q) = line.strip_prefix("Question:") {
            if let Some(prev) = open.take() {
                fail(&mut out, lineno, &prev, prev.incomplete_rule());
            }
            let block = Open {
                start: lineno,
                question: q.trim().to_string(),
                options: Vec::new(),
                explanation: None,
            };
            if block.question.is_empty() {
                fail(&mut out, lineno, &block, ParseRule::EmptyQuestion);
            } else {
                open = Some(block);
            }
            continue;
        }
        let Some(block) = open.as_mut() else {
            continue;
        };
        if line.is_empty() {
            continue;
        }
        if block.options.len() < 4 {
            let letter = Letter::ALL[block.options.len()];
            let prefix = format!("{letter})");
            match line.strip_prefix(&prefix) {
                Some(text) if !text.trim().is_empty() => block.options.push(text.trim().to_string()),
                Some(_) => {
                    let b = open.take().unwrap();
                    fail(&mut out, lineno, &b, ParseRule::EmptyOption(letter));
                }
                None => {
                    let b = open.take().unwrap();
                    fail(&mut out, lineno, &b, ParseRule::MissingOption(letter));
                }
            }
            continue;
        }
        if block.explanation.is_none() {
            if let Some(e) = line.strip_prefix("Explanation:") {
                block.explanation = Some(e.trim().to_string()).filter(|e| !e.is_empty());
                continue;
            }
        }
        let b = open.take().unwrap();
        match line.strip_prefix("Correct:") {
            Some(rest) => match parse_correct(rest) {
                Some(correct) => {
                    let [a, bb, c, d]: [String; 4] = b.options.try_into().expect("four options");
                    out.blocks.push(ParsedBlock {
                        question: b.question,
                        options: Options::from_array([a, bb, c, d]),
                        correct,
                        explanation: b.explanation,
                    });
                }
                None => fail(&mut out, lineno, &b, ParseRule::InvalidCorrectLetter),
            },
            None => fail(&mut out, lineno, &b, ParseRule::MissingCorrectTerminator),
        }
    }
    if let Some(b) = open.take() {
        let last = raw.lines().count().max(1);
        fail(&mut out, last, &b, b.incomplete_rule());
    }
    out
}

/// Render a block in the output grammar.
pub fn render_block(block: &ParsedBlock) -> String {
    let mut s = format!("Question: {}\n", block.question);
    for (l, text) in block.options.iter() {
        s.push_str(&format!("{l}) {text}\n"));
    }
    if let Some(e) = &block.explanation {
        s.push_str(&format!("Explanation: {e}\n"));
    }
    s.push_str(&format!("Correct: {}\n", block.correct));
    s
}
