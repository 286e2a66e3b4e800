use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::adapter::Role;
use crate::error::{Error, Result};
use crate::scenario::ScenarioKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRef {
    pub kind: ScenarioKind,
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    MaxTurns,
    ModelError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub role: Role,
    pub text: String,
    /// Model turn that asked something (not the concluding answer).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_query: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_final: bool,
    /// Query was cut to the token cap before matching.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
    /// Nodes first matched on this turn.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matched_node_ids: Vec<String>,
    /// Facts the preceding clinician question asked about.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fact_ids: Vec<String>,
    /// Facts this answer disclosed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disclosed_fact_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contradiction: Option<String>,
    pub timestamp_ms: u64,
}

impl Turn {
    pub fn new(index: usize, role: Role, text: impl Into<String>, timestamp_ms: u64) -> Self {
        Self {
            index,
            role,
            text: text.into(),
            is_query: false,
            is_final: false,
            truncated: false,
            matched_node_ids: Vec::new(),
            fact_ids: Vec::new(),
            disclosed_fact_ids: Vec::new(),
            contradiction: None,
            timestamp_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalAnswer {
    /// Ranked, most likely first.
    pub diagnoses: Vec<String>,
    pub plan: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structured: Option<Value>,
    /// No `FINAL:` marker was given; the last turn stood in.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unmarked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    Structured,
    Extracted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoAnswer {
    pub locale: String,
    pub antigens: BTreeSet<String>,
    pub formulation: String,
    pub counselling: String,
    pub method: ExtractionMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub transcript_id: String,
    pub scenario: ScenarioRef,
    pub model_id: String,
    pub turns: Vec<Turn>,
    #[serde(default)]
    pub final_answer: Option<FinalAnswer>,
    /// Per-stage answers of a two-stage bias session.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_answers: Vec<FinalAnswer>,
    /// Locale A then locale B for a geo pair.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub geo_answers: Vec<GeoAnswer>,
    pub termination: Termination,
}

impl Transcript {
    pub fn model_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.role == Role::Model)
    }

    /// All model text joined with newlines.
    pub fn model_text(&self) -> String {
        self.model_turns()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Nodes matched before the final answer, in first-match order.
    pub fn matched_node_ids(&self) -> Vec<&str> {
        self.turns
            .iter()
            .take_while(|t| !t.is_final)
            .flat_map(|t| t.matched_node_ids.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header {
        transcript_id: String,
        scenario: ScenarioRef,
        model_id: String,
    },
    Turn(Turn),
    Footer {
        final_answer: Option<FinalAnswer>,
        #[serde(default)]
        stage_answers: Vec<FinalAnswer>,
        #[serde(default)]
        geo_answers: Vec<GeoAnswer>,
        termination: Termination,
    },
}

/// One header line, one line per turn, one footer line.
pub fn transcript_to_jsonl(t: &Transcript) -> String {
    let mut records = vec![Record::Header {
        transcript_id: t.transcript_id.clone(),
        scenario: t.scenario.clone(),
        model_id: t.model_id.clone(),
    }];
    records.extend(t.turns.iter().cloned().map(Record::Turn));
    records.push(Record::Footer {
        final_answer: t.final_answer.clone(),
        stage_answers: t.stage_answers.clone(),
        geo_answers: t.geo_answers.clone(),
        termination: t.termination,
    });
    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r).expect("transcript records serialize"));
        out.push('\n');
    }
    out
}

pub fn transcript_from_jsonl(reader: impl BufRead, origin: &str) -> Result<Transcript> {
    let records: Vec<Record> = crate::jsonl::parse_lines(reader, origin)?;
    let mut it = records.into_iter();
    let Some(Record::Header {
        transcript_id,
        scenario,
        model_id,
    }) = it.next()
    else {
        return Err(Error::Validation(format!("{origin}: first record must be a header")));
    };
    let mut turns = Vec::new();
    for r in it {
        match r {
            Record::Turn(t) => turns.push(t),
            Record::Footer {
                final_answer,
                stage_answers,
                geo_answers,
                termination,
            } => {
                return Ok(Transcript {
                    transcript_id,
                    scenario,
                    model_id,
                    turns,
                    final_answer,
                    stage_answers,
                    geo_answers,
                    termination,
                })
            }
            Record::Header { .. } => {
                return Err(Error::Validation(format!("{origin}: second header record")))
            }
        }
    }
    Err(Error::Validation(format!("{origin}: missing footer record")))
}

pub fn write_transcript(path: &Path, t: &Transcript) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(transcript_to_jsonl(t).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_transcript(path: &Path) -> Result<Transcript> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    transcript_from_jsonl(BufReader::new(file), &path.display().to_string())
}
