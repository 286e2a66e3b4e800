use serde::{Deserialize, Serialize};

use super::{GuidelineDoc, PartHeading};
use crate::error::{Error, Result};

/// One structural error, tied to its 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Heading { level: usize, title: String },
    Paragraph {
        text: String,
        page_start: u32,
        page_end: u32,
    },
}

fn diag(line: usize, message: impl Into<String>) -> StructureDiagnostic {
    StructureDiagnostic {
        line,
        message: message.into(),
    }
}

fn parse_page_marker(line: &str) -> Option<Option<u32>> {
    let inner = line.strip_prefix("[[page=")?.strip_suffix("]]")?;
    Some(inner.trim().parse::<u32>().ok().filter(|p| *p > 0))
}

/// Parses the ingestion marker format.
///
/// ```text
/// @doc_id: kenya-l23
/// @version: MoH-2024
/// #PART II: Paediatrics
/// ##SECTION Pneumonia
/// ###SUBSECTION Treatment
/// [[page=12]]
/// Paragraph text, blank-line separated.
/// ```
///
/// Header directives (`@doc_id`, `@title`, `@publisher`, `@version`,
/// `@source`) must precede the first heading.
pub fn parse_marker_text(input: &str) -> Result<GuidelineDoc> {
    let mut doc = GuidelineDoc {
        doc_id: String::new(),
        title: String::new(),
        publisher: String::new(),
        version_tag: String::new(),
        parts: Vec::new(),
        source_uri: String::new(),
        blocks: Vec::new(),
    };
    let mut diags = Vec::new();
    let mut page: u32 = 1;
    let mut depth = 0usize;
    let mut seen_heading = false;
    let mut para: Option<(Vec<&str>, u32, u32)> = None;

    let flush = |para: &mut Option<(Vec<&str>, u32, u32)>, blocks: &mut Vec<Block>| {
        if let Some((lines, start, end)) = para.take() {
            blocks.push(Block::Paragraph {
                text: lines.join("\n"),
                page_start: start,
                page_end: end,
            });
        }
    };

    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();

        if line.is_empty() {
            flush(&mut para, &mut doc.blocks);
            continue;
        }
        if line.starts_with("[[page=") {
            match parse_page_marker(line) {
                Some(Some(p)) => {
                    page = p;
                    if let Some((_, _, end)) = para.as_mut() {
                        *end = p;
                    }
                }
                _ => diags.push(diag(lineno, format!("invalid page marker `{line}`"))),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('@') {
            if seen_heading {
                diags.push(diag(lineno, "header directive after first heading"));
                continue;
            }
            let Some((key, value)) = rest.split_once(':') else {
                diags.push(diag(lineno, format!("malformed directive `{line}`")));
                continue;
            };
            let value = value.trim().to_string();
            match key.trim() {
                "doc_id" => doc.doc_id = value,
                "title" => doc.title = value,
                "publisher" => doc.publisher = value,
                "version" => doc.version_tag = value,
                "source" => doc.source_uri = value,
                other => diags.push(diag(lineno, format!("unknown directive `@{other}`"))),
            }
            continue;
        }
        if line.starts_with('#') {
            flush(&mut para, &mut doc.blocks);
            seen_heading = true;
            let (level, title) = if let Some(t) = line.strip_prefix("###SUBSECTION") {
                (3, t)
            } else if let Some(t) = line.strip_prefix("##SECTION") {
                (2, t)
            } else if let Some(t) = line.strip_prefix("#PART") {
                (1, t)
            } else {
                diags.push(diag(lineno, format!("unknown heading marker `{line}`")));
                continue;
            };
            let title = title.trim();
            if title.is_empty() {
                diags.push(diag(lineno, "heading without a title"));
                continue;
            }
            if level > depth + 1 {
                let parent = if level == 3 { "##SECTION" } else { "#PART" };
                diags.push(diag(
                    lineno,
                    format!("orphan heading `{line}` has no enclosing {parent}"),
                ));
                continue;
            }
            depth = level;
            if level == 1 {
                let (label, ptitle) = match title.split_once(':') {
                    Some((l, t)) if !l.trim().is_empty() && !t.trim().is_empty() => {
                        (l.trim().to_string(), t.trim().to_string())
                    }
                    _ => (title.to_string(), title.to_string()),
                };
                doc.parts.push(PartHeading {
                    label: label.clone(),
                    title: ptitle,
                });
                doc.blocks.push(Block::Heading {
                    level,
                    title: label,
                });
            } else {
                doc.blocks.push(Block::Heading {
                    level,
                    title: title.to_string(),
                });
            }
            continue;
        }
        if depth == 0 {
            diags.push(diag(lineno, "content before the first #PART heading"));
            continue;
        }
        match para.as_mut() {
            Some((lines, _, end)) => {
                lines.push(line);
                *end = page;
            }
            None => para = Some((vec![line], page, page)),
        }
    }
    flush(&mut para, &mut doc.blocks);

    if !diags.is_empty() {
        return Err(Error::Structure(diags));
    }
    if !doc.blocks.iter().any(|b| matches!(b, Block::Paragraph { .. })) {
        return Err(Error::EmptyInput("document has no body text".into()));
    }
    Ok(doc)
}
