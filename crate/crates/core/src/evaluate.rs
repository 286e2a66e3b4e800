//! Run scenarios against a candidate model, score the transcripts and
//! assemble the report.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::harness::{
    run_bias_session, run_decision_session, run_geo_query, run_needle_session, run_reverse_session, write_transcript,
    Clock, LogicalClock, ModelAdapter, SessionContext, SystemClock, Termination, Transcript,
};
use crate::metrics::{
    assemble_report, delta_cas, normalized_set, score_cas, score_cbst, score_decision_points, score_needle,
    score_reverse, BootstrapSettings, CaseResult, MetricConfig, MetricReport,
};
use crate::retrieval::Embedder;
use crate::scenario::{audit_needle_case, NeedleAudit, Scenario, ScenarioKind};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone)]
pub struct EvaluationOptions {
    /// `None` runs every kind present.
    pub metrics: Option<BTreeSet<ScenarioKind>>,
    pub parallelism: usize,
    pub metric_config: MetricConfig,
    pub bootstrap: BootstrapSettings,
    /// Per-session counting clocks instead of wall time, for byte-stable
    /// transcripts.
    pub logical_clock: bool,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            metrics: None,
            parallelism: 4,
            metric_config: MetricConfig::default(),
            bootstrap: BootstrapSettings::default(),
            logical_clock: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub transcripts: Vec<Transcript>,
    pub results: Vec<CaseResult>,
    pub report: MetricReport,
}

/// Structural validation plus the needle audit; evaluation refuses
/// scenarios that fail either.
pub fn check_scenario(s: &Scenario, vocab: &Vocabulary) -> Result<()> {
    s.validate(vocab)?;
    if let Scenario::Needle(c) = s {
        if let NeedleAudit::Fail { reasons } = audit_needle_case(c) {
            return Err(Error::Validation(format!(
                "needle case {} fails audit: {}",
                c.case_id,
                reasons.join("; ")
            )));
        }
    }
    Ok(())
}

pub fn run_session(s: &Scenario, cx: &SessionContext) -> Result<Transcript> {
    match s {
        Scenario::Decision(v) => run_decision_session(v, cx),
        Scenario::Needle(c) => run_needle_session(c, cx),
        Scenario::Reverse(r) => run_reverse_session(&r.persona, &r.script, cx),
        Scenario::Geo(g) => run_geo_query(g, cx),
        Scenario::Bias(b) => run_bias_session(b, cx),
    }
}

pub fn score_transcript(
    s: &Scenario,
    t: &Transcript,
    embedder: &dyn Embedder,
    vocab: &Vocabulary,
    cfg: &MetricConfig,
) -> Result<CaseResult> {
    let scenario_id = s.id().to_string();
    Ok(match s {
        Scenario::Decision(v) => CaseResult::Decision {
            scenario_id,
            result: score_decision_points(t, v),
        },
        Scenario::Needle(c) => CaseResult::Needle {
            scenario_id,
            result: score_needle(t, c, vocab, embedder, cfg.similarity_threshold, cfg.top_k)?,
        },
        Scenario::Reverse(r) => CaseResult::Reverse {
            scenario_id,
            result: score_reverse(t, &r.persona, embedder, &cfg.reverse)?,
        },
        Scenario::Geo(g) => {
            let [ans_a, ans_b] = t.geo_answers.as_slice() else {
                return Err(Error::Precondition(format!("geo transcript {} lacks two answers", t.transcript_id)));
            };
            let (key_a, key_b) = (&g.scenario_a.answer_key, &g.scenario_b.answer_key);
            let a = score_cas(ans_a, key_a, vocab, &cfg.cas);
            let b = score_cas(ans_b, key_b, vocab, &cfg.cas);
            let delta = delta_cas(
                a.cas10,
                b.cas10,
                &normalized_set(vocab, &ans_a.antigens),
                &normalized_set(vocab, &ans_b.antigens),
                &normalized_set(vocab, &key_a.required_antigens),
                &normalized_set(vocab, &key_b.required_antigens),
            );
            CaseResult::Geo {
                scenario_id,
                locale_a: g.scenario_a.locale.clone(),
                locale_b: g.scenario_b.locale.clone(),
                a,
                b,
                delta_cas: delta,
            }
        }
        Scenario::Bias(b) => CaseResult::Bias {
            scenario_id,
            result: score_cbst(t, b, vocab, embedder, cfg.similarity_threshold, &cfg.cbst)?,
        },
    })
}

pub fn evaluate(
    scenarios: &[Scenario],
    model: &dyn ModelAdapter,
    embedder: &dyn Embedder,
    vocab: &Vocabulary,
    opts: &EvaluationOptions,
) -> Result<Evaluation> {
    opts.metric_config.validate()?;
    let selected: Vec<&Scenario> = scenarios
        .iter()
        .filter(|s| opts.metrics.as_ref().is_none_or(|m| m.contains(&s.kind())))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyInput("no scenarios match the metric selection".into()));
    }
    let mut ids = BTreeSet::new();
    for s in &selected {
        check_scenario(s, vocab)?;
        if !ids.insert((s.kind(), s.id())) {
            return Err(Error::Validation(format!("duplicate {} scenario {}", s.kind(), s.id())));
        }
    }

    let slots: Vec<Mutex<Option<Result<Transcript>>>> = selected.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..opts.parallelism.clamp(1, selected.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= selected.len() {
                    break;
                }
                let clock: Box<dyn Clock> = if opts.logical_clock {
                    Box::new(LogicalClock::default())
                } else {
                    Box::new(SystemClock)
                };
                let mut cx = SessionContext::new(model, embedder, vocab, clock.as_ref());
                cx.match_threshold = opts.metric_config.similarity_threshold;
                let t = run_session(selected[i], &cx);
                *slots[i].lock().expect("slot lock") = Some(t);
            });
        }
    });

    let mut transcripts = Vec::new();
    let mut results = Vec::new();
    let mut unscored = Vec::new();
    for (s, slot) in selected.iter().zip(slots) {
        let t = slot.into_inner().expect("slot lock").expect("session ran")?;
        if t.termination == Termination::ModelError {
            unscored.push(format!("{}:{}", s.kind(), s.id()));
        } else {
            results.push(score_transcript(s, &t, embedder, vocab, &opts.metric_config)?);
        }
        transcripts.push(t);
    }
    if results.is_empty() {
        return Err(Error::BatchFailed(unscored.len()));
    }
    let mut report = assemble_report(model.id(), &results, opts.bootstrap)?;
    report.unscored = unscored;
    Ok(Evaluation {
        transcripts,
        results,
        report,
    })
}

fn file_stem(t: &Transcript) -> String {
    let id: String = t
        .scenario
        .id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{}-{id}", t.scenario.kind)
}

/// `transcripts/<kind>-<id>.jsonl`, `report.json`, `report.md`, `cases.csv`.
pub fn write_outputs(e: &Evaluation, out_dir: &Path) -> Result<()> {
    let tdir = out_dir.join("transcripts");
    std::fs::create_dir_all(&tdir).map_err(|err| Error::io(&tdir, err))?;
    for t in &e.transcripts {
        write_transcript(&tdir.join(format!("{}.jsonl", file_stem(t))), t)?;
    }
    let write = |name: &str, body: String| {
        let p = out_dir.join(name);
        std::fs::write(&p, body).map_err(|err| Error::io(&p, err))
    };
    write("report.json", e.report.to_json())?;
    write("report.md", e.report.to_markdown())?;
    write("cases.csv", e.report.to_csv()?)
}
