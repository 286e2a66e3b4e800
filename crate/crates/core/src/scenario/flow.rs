//! Decision-node extraction from line-oriented flow text.
//!
//! Marker lines look like
//! `?NODE id="rr" critical="true" label="breathing rate" reveal="RR 58/min"`
//! with optional `synonyms="a|b"` and `pattern="regex"` attributes. All other
//! lines are free text and ignored.

use std::collections::BTreeMap;

use crate::corpus::StructureDiagnostic;
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

use super::types::Node;

pub const MARKER: &str = "?NODE";
const KNOWN_ATTRS: [&str; 6] = ["critical", "id", "label", "pattern", "reveal", "synonyms"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub nodes: Vec<Node>,
    pub warnings: Vec<String>,
}

/// Parse `key="value"` pairs; `\"` and `\\` escape inside values.
fn parse_attrs(rest: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = rest.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        if chars.peek().is_none() {
            return Ok(out);
        }
        let mut key = String::new();
        while let Some(c) = chars.next_if(|c| c.is_ascii_alphanumeric() || *c == '_') {
            key.push(c);
        }
        if key.is_empty() {
            return Err(format!("unexpected character {:?}", chars.peek().unwrap()));
        }
        if chars.next() != Some('=') || chars.next() != Some('"') {
            return Err(format!("attribute `{key}` must be written as {key}=\"...\""));
        }
        let mut value = String::new();
        loop {
            match chars.next() {
                None => return Err(format!("unterminated value for `{key}`")),
                Some('"') => break,
                Some('\\') => match chars.next() {
                    Some(c @ ('"' | '\\')) => value.push(c),
                    Some(c) => {
                        value.push('\\');
                        value.push(c);
                    }
                    None => return Err(format!("unterminated value for `{key}`")),
                },
                Some(c) => value.push(c),
            }
        }
        out.push((key, value));
    }
}

fn parse_marker(rest: &str, vocab: &Vocabulary) -> std::result::Result<Node, String> {
    let mut attrs: BTreeMap<String, String> = BTreeMap::new();
    for (k, v) in parse_attrs(rest)? {
        if !KNOWN_ATTRS.contains(&k.as_str()) {
            return Err(format!("unknown attribute `{k}`"));
        }
        if attrs.insert(k.clone(), v).is_some() {
            return Err(format!("attribute `{k}` given twice"));
        }
    }
    let mut take = |k: &str| -> std::result::Result<String, String> {
        match attrs.remove(k) {
            Some(v) if !v.trim().is_empty() => Ok(v),
            _ => Err(format!("missing attribute `{k}`")),
        }
    };
    let node_id = take("id")?;
    let label = take("label")?;
    let reveal_text = take("reveal")?;
    let critical = match take("critical")?.as_str() {
        "true" => true,
        "false" => false,
        other => return Err(format!("critical must be true or false, got `{other}`")),
    };
    let mut synonyms: Vec<String> = attrs
        .remove("synonyms")
        .map(|s| {
            s.split('|')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
        .unwrap_or_default();
    if let Some(c) = vocab.lookup(&label) {
        for s in std::iter::once(&c.label).chain(&c.synonyms) {
            if !s.eq_ignore_ascii_case(&label) && !synonyms.iter().any(|x| x.eq_ignore_ascii_case(s)) {
                synonyms.push(s.clone());
            }
        }
    }
    let patterns: Vec<String> = attrs.remove("pattern").into_iter().collect();
    for p in &patterns {
        regex::RegexBuilder::new(p)
            .case_insensitive(true)
            .build()
            .map_err(|e| format!("invalid pattern: {e}"))?;
    }
    Ok(Node {
        node_id,
        label,
        synonyms,
        patterns,
        reveal_text,
        critical,
    })
}

pub fn extract_decision_nodes(flow: &str, vocab: &Vocabulary) -> Result<Extraction> {
    let mut nodes = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in flow.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix(MARKER) else {
            continue;
        };
        if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
            continue;
        }
        match parse_marker(rest, vocab) {
            Ok(n) if nodes.iter().any(|m: &Node| m.node_id == n.node_id) => {
                diags.push(StructureDiagnostic {
                    line: i + 1,
                    message: format!("duplicate node id `{}`", n.node_id),
                })
            }
            Ok(n) => nodes.push(n),
            Err(message) => diags.push(StructureDiagnostic { line: i + 1, message }),
        }
    }
    if !diags.is_empty() {
        return Err(Error::Structure(diags));
    }
    let warnings = if nodes.is_empty() {
        vec!["flow text contains no ?NODE markers".to_string()]
    } else {
        Vec::new()
    };
    Ok(Extraction { nodes, warnings })
}

/// Render a node back to its marker line.
pub fn render_marker(node: &Node) -> String {
    let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
    let mut line = format!(
        "{MARKER} id=\"{}\" critical=\"{}\" label=\"{}\" reveal=\"{}\"",
        esc(&node.node_id),
        node.critical,
        esc(&node.label),
        esc(&node.reveal_text)
    );
    if !node.synonyms.is_empty() {
        line.push_str(&format!(" synonyms=\"{}\"", esc(&node.synonyms.join("|"))));
    }
    if let Some(p) = node.patterns.first() {
        line.push_str(&format!(" pattern=\"{}\"", esc(p)));
    }
    line
}
