use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_ci, AggregateStat};
use super::{CasResult, CbstResult, DecisionPointResult, NeedleResult, ReverseResult};
use crate::error::{Error, Result};
use crate::scenario::ScenarioKind;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            resamples: super::bootstrap::DEFAULT_RESAMPLES,
            level: super::bootstrap::DEFAULT_LEVEL,
            seed: crate::config::DEFAULT_SEED,
        }
    }
}

/// One scored scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum CaseResult {
    Decision {
        scenario_id: String,
        result: DecisionPointResult,
    },
    Needle {
        scenario_id: String,
        result: NeedleResult,
    },
    Reverse {
        scenario_id: String,
        result: ReverseResult,
    },
    Geo {
        scenario_id: String,
        locale_a: String,
        locale_b: String,
        a: CasResult,
        b: CasResult,
        delta_cas: f64,
    },
    Bias {
        scenario_id: String,
        result: CbstResult,
    },
}

impl CaseResult {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            CaseResult::Decision { .. } => ScenarioKind::Decision,
            CaseResult::Needle { .. } => ScenarioKind::Needle,
            CaseResult::Reverse { .. } => ScenarioKind::Reverse,
            CaseResult::Geo { .. } => ScenarioKind::Geo,
            CaseResult::Bias { .. } => ScenarioKind::Bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub scenario_id: String,
    pub score: f64,
    pub components: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSection {
    pub metric: ScenarioKind,
    pub score_name: String,
    pub scale_max: f64,
    pub summary: AggregateStat,
    pub cases: Vec<CaseRow>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Per-metric sections only; metrics are never collapsed into one score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub format_version: u32,
    pub model_id: String,
    pub bootstrap: BootstrapSettings,
    pub sections: Vec<MetricSection>,
    /// Scenarios whose session ended in a model error and were not scored.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unscored: Vec<String>,
}

fn comps(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn rows(case: &CaseResult) -> Vec<CaseRow> {
    match case {
        CaseResult::Decision { scenario_id, result: r } => vec![CaseRow {
            scenario_id: scenario_id.clone(),
            score: r.score10,
            components: comps(&[
                ("n_asked", r.n_asked as f64),
                ("n_critical", r.n_critical as f64),
                ("n_asked_critical", r.n_asked_critical as f64),
                ("precision", r.precision),
                ("recall", r.recall),
                ("f", r.f),
            ]),
            flags: BTreeMap::new(),
        }],
        CaseResult::Needle { scenario_id, result: r } => vec![CaseRow {
            scenario_id: scenario_id.clone(),
            score: r.score,
            components: BTreeMap::new(),
            flags: BTreeMap::from([
                ("clue_detected".to_string(), r.clue_detected),
                ("correct_diagnosis".to_string(), r.correct_diagnosis),
            ]),
        }],
        CaseResult::Reverse { scenario_id, result: r } => vec![CaseRow {
            scenario_id: scenario_id.clone(),
            score: r.composite10,
            components: comps(&[
                ("consistency", r.consistency),
                ("completeness", r.completeness),
                ("style_realism", r.style_realism),
                ("linguistic", r.linguistic),
                ("contradictions", r.contradictions as f64),
                ("questions", r.questions as f64),
            ]),
            flags: BTreeMap::from([
                ("consistency_gate".to_string(), r.consistency_gate),
                ("completeness_gate".to_string(), r.completeness_gate),
            ]),
        }],
        CaseResult::Geo {
            scenario_id,
            locale_a,
            locale_b,
            a,
            b,
            delta_cas,
        } => [(locale_a, a), (locale_b, b)]
            .into_iter()
            .map(|(loc, r)| CaseRow {
                scenario_id: format!("{scenario_id}/{loc}"),
                score: r.cas10,
                components: comps(&[
                    ("antigen_accuracy", r.antigen_accuracy),
                    ("formulation_fit", r.formulation_fit),
                    ("resource_alignment", r.resource_alignment),
                    ("rationale_localization", r.rationale_localization),
                    ("pair_delta_cas", *delta_cas),
                ]),
                flags: BTreeMap::new(),
            })
            .collect(),
        CaseResult::Bias { scenario_id, result: r } => vec![CaseRow {
            scenario_id: scenario_id.clone(),
            score: r.cbst10,
            components: comps(&[
                ("anchor_flexibility", r.anchor_flexibility),
                ("contradiction_recognition", r.contradiction_recognition),
                ("breadth", r.breadth),
                ("action_appropriateness", r.action_appropriateness),
            ]),
            flags: BTreeMap::new(),
        }],
    }
}

fn score_name(kind: ScenarioKind) -> (&'static str, f64) {
    match kind {
        ScenarioKind::Decision => ("decision_point_f10", 10.0),
        ScenarioKind::Needle => ("needle_score", 1.0),
        ScenarioKind::Reverse => ("reverse_qa_composite10", 10.0),
        ScenarioKind::Geo => ("cas10", 10.0),
        ScenarioKind::Bias => ("cbst10", 10.0),
    }
}

pub fn assemble_report(model_id: &str, results: &[CaseResult], settings: BootstrapSettings) -> Result<MetricReport> {
    if results.is_empty() {
        return Err(Error::Precondition("report needs at least one scored case".into()));
    }
    let mut sections = Vec::new();
    for kind in ScenarioKind::ALL {
        let of_kind: Vec<&CaseResult> = results.iter().filter(|r| r.kind() == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let cases: Vec<CaseRow> = of_kind.iter().flat_map(|c| rows(c)).collect();
        let scores: Vec<f64> = cases.iter().map(|c| c.score).collect();
        let summary = bootstrap_ci(&scores, settings.resamples, settings.level, settings.seed)?;
        let mut extras = BTreeMap::new();
        let mut notes = Vec::new();
        match kind {
            ScenarioKind::Geo => {
                let deltas: Vec<f64> = of_kind
                    .iter()
                    .filter_map(|c| match c {
                        CaseResult::Geo { delta_cas, .. } => Some(*delta_cas),
                        _ => None,
                    })
                    .collect();
                extras.insert("delta_cas_mean".into(), super::bootstrap::mean(&deltas));
                notes.push(
                    "delta_cas is a constructed flexibility measure: mean pair CAS minus 10 x the \
                     excess of prediction overlap over key overlap"
                        .into(),
                );
            }
            ScenarioKind::Bias => {
                let cb: Vec<CbstResult> = of_kind
                    .iter()
                    .filter_map(|c| match c {
                        CaseResult::Bias { result, .. } => Some(*result),
                        _ => None,
                    })
                    .collect();
                extras.insert("bsi".into(), super::cbst::bsi(&cb)?);
            }
            ScenarioKind::Reverse => {
                let n = cases.len() as f64;
                for gate in ["consistency_gate", "completeness_gate"] {
                    let pass = cases.iter().filter(|c| c.flags.get(gate) == Some(&true)).count();
                    extras.insert(format!("{gate}_pass_rate"), pass as f64 / n);
                }
            }
            _ => {}
        }
        let (name, max) = score_name(kind);
        sections.push(MetricSection {
            metric: kind,
            score_name: name.into(),
            scale_max: max,
            summary,
            cases,
            extras,
            notes,
        });
    }
    Ok(MetricReport {
        format_version: REPORT_FORMAT_VERSION,
        model_id: model_id.into(),
        bootstrap: settings,
        sections,
        unscored: Vec::new(),
    })
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let b = &self.bootstrap;
        let _ = writeln!(out, "# Evaluation report: {}\n", self.model_id);
        let _ = writeln!(
            out,
            "Bootstrap: {} resamples, level {}, seed {}.\n",
            b.resamples, b.level, b.seed
        );
        if !self.unscored.is_empty() {
            let _ = writeln!(out, "Unscored after model errors: {}\n", self.unscored.join(", "));
        }
        for s in &self.sections {
            let m = &s.summary;
            let _ = writeln!(out, "## {}\n", s.metric);
            let _ = writeln!(
                out,
                "{} (0-{}): mean {:.4}, CI [{:.4}, {:.4}], n = {}\n",
                s.score_name, s.scale_max, m.mean, m.ci_low, m.ci_high, m.n
            );
            for (k, v) in &s.extras {
                let _ = writeln!(out, "- {k}: {v:.4}");
            }
            for n in &s.notes {
                let _ = writeln!(out, "- note: {n}");
            }
            if !s.extras.is_empty() || !s.notes.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "| scenario | score | details |\n|---|---|---|");
            for c in &s.cases {
                let _ = writeln!(out, "| {} | {:.4} | {} |", c.scenario_id, c.score, details(c));
            }
            out.push('\n');
        }
        out
    }

    /// One row per case: metric, scenario_id, score, details.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Validation(format!("csv export: {e}"));
        w.write_record(["metric", "scenario_id", "score", "details"]).map_err(wrap)?;
        for s in &self.sections {
            for c in &s.cases {
                w.write_record([
                    s.metric.as_str(),
                    &c.scenario_id,
                    &c.score.to_string(),
                    &details(c),
                ])
                .map_err(wrap)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Validation(format!("csv export: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn details(c: &CaseRow) -> String {
    c.components
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .chain(c.flags.iter().map(|(k, v)| format!("{k}={v}")))
        .collect::<Vec<_>>()
        .join("; ")
}
