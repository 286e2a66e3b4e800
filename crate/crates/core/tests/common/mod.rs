//! Shared fixtures, independent oracles and the checks behind the
//! acceptance target. Each `check_*` returns a one-line detail on success.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use guidebench::corpus::{chunk_document, diff_versions, parse_marker_text, part_distribution, Block, ChunkConfig};
use guidebench::evaluate::{evaluate, write_outputs, EvaluationOptions};
use guidebench::generation::grammar::parse_lenient;
use guidebench::generation::{parse_mcq_output, render_block, Letter, Options, ParseRule, ParsedBlock};
use guidebench::harness::{FinalAnswer, GeoAnswer, ExtractionMethod, Role, ScenarioRef, ScriptedMock, Termination, Transcript, Turn};
use guidebench::metrics::{
    affect_reference, bootstrap_ci, delta_cas, jaccard, score_cas, score_cbst, score_decision_points, score_needle,
    score_reverse, CasWeights, CbstResult, CbstWeights, DecisionPointResult, NeedleResult, ReverseResult,
    ReverseWeights,
};
use guidebench::retrieval::HashEmbedder;
use guidebench::review::{
    assign_blinded, serve, DecisionThresholds, ReviewBoard, RubricScore, Tokens, Verdict,
};
use guidebench::scenario::{
    build_geo_pair, bundled_schedule, read_scenarios, AnswerKey, BiasCase, BiasType, DecisionVignette, GeoAnswerKey,
    GeoTemplate, NeedleCase, Node, PersonaSheet, ResourceConstraint, Scenario, ScenarioKind,
};
use guidebench::text::tokens;
use guidebench::vocab::Vocabulary;

pub const TOL: f64 = 1e-12;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn scenario_files() -> Vec<PathBuf> {
    ["decision", "needle", "reverse", "geo", "bias"]
        .iter()
        .map(|k| fixture(&format!("scenarios/{k}.jsonl")))
        .collect()
}

pub fn all_scenarios() -> Vec<Scenario> {
    scenario_files()
        .iter()
        .flat_map(|p| read_scenarios(p).expect("scenario fixture"))
        .collect()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn transcript(kind: ScenarioKind, id: &str) -> Transcript {
    Transcript {
        transcript_id: format!("trn-{id}"),
        scenario: ScenarioRef { kind, id: id.into() },
        model_id: "oracle".into(),
        turns: Vec::new(),
        final_answer: None,
        stage_answers: Vec::new(),
        geo_answers: Vec::new(),
        termination: Termination::Completed,
    }
}

fn push<'a>(t: &'a mut Transcript, role: Role, text: &str) -> &'a mut Turn {
    let i = t.turns.len();
    t.turns.push(Turn::new(i, role, text, i as u64));
    t.turns.last_mut().unwrap()
}

fn answer(diagnoses: Vec<String>, plan: &str) -> FinalAnswer {
    FinalAnswer {
        diagnoses,
        plan: plan.into(),
        structured: None,
        unmarked: false,
    }
}

// ---------------------------------------------------------------- oracles

/// Random decision transcript in the shape a session produces: each query
/// records only nodes it newly matched, sometimes an id the vignette does
/// not know, and turns after the final answer must be ignored.
pub fn random_decision(rng: &mut ChaCha8Rng) -> (DecisionVignette, Transcript) {
    let n = rng.gen_range(1..=8);
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            node_id: format!("n{i}"),
            label: format!("label {i}"),
            synonyms: vec![],
            patterns: vec![],
            reveal_text: format!("reveal {i}"),
            critical: rng.gen_bool(0.5),
        })
        .collect();
    let v = DecisionVignette {
        vignette_id: "v".into(),
        narrative: "narrative".into(),
        hidden_nodes: nodes,
        answer_key: AnswerKey {
            diagnosis: "d".into(),
            management: String::new(),
        },
        max_turns: 20,
        query_token_cap: 60,
    };
    let mut t = transcript(ScenarioKind::Decision, "v");
    let mut remaining: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    remaining.shuffle(rng);
    push(&mut t, Role::Harness, "narrative");
    for _ in 0..rng.gen_range(0..12) {
        let mut ids = Vec::new();
        if rng.gen_bool(0.7) {
            for _ in 0..rng.gen_range(1..=2) {
                if let Some(id) = remaining.pop() {
                    ids.push(id);
                }
            }
        }
        if rng.gen_bool(0.1) {
            ids.push("ghost".into());
        }
        let turn = push(&mut t, Role::Model, "query");
        turn.is_query = true;
        turn.matched_node_ids = ids;
        push(&mut t, Role::Harness, "reply");
    }
    if rng.gen_bool(0.8) {
        push(&mut t, Role::Model, "FINAL: d").is_final = true;
        if rng.gen_bool(0.3) {
            let turn = push(&mut t, Role::Model, "late query");
            turn.is_query = true;
            turn.matched_node_ids = remaining.clone();
        }
    }
    (v, t)
}

/// Set-intersection recomputation: asked = distinct real nodes queried
/// before the final answer plus queries that found none.
pub fn decision_oracle(v: &DecisionVignette, t: &Transcript) -> (f64, f64, f64) {
    let real: BTreeSet<&str> = v.hidden_nodes.iter().map(|n| n.node_id.as_str()).collect();
    let critical: BTreeSet<&str> = v.hidden_nodes.iter().filter(|n| n.critical).map(|n| n.node_id.as_str()).collect();
    let before_final: Vec<&Turn> = match t.turns.iter().position(|x| x.is_final) {
        Some(p) => t.turns[..p].iter().collect(),
        None => t.turns.iter().collect(),
    };
    let mut asked = BTreeSet::new();
    let mut empty = 0usize;
    for q in before_final.iter().filter(|x| x.is_query) {
        let hits: Vec<&str> = q.matched_node_ids.iter().map(String::as_str).filter(|i| real.contains(i)).collect();
        if hits.is_empty() {
            empty += 1;
        }
        asked.extend(hits);
    }
    let k = asked.intersection(&critical).count() as f64;
    let n_asked = (asked.len() + empty) as f64;
    let n_crit = critical.len() as f64;
    let p = if n_asked == 0.0 { 0.0 } else { k / n_asked };
    let r = if n_crit == 0.0 { 0.0 } else { k / n_crit };
    let f = if n_asked + n_crit == 0.0 { 0.0 } else { 2.0 * k / (n_asked + n_crit) };
    (p, r, 10.0 * f)
}

pub fn oracle_decision(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        let (v, t) = random_decision(&mut rng);
        let got: DecisionPointResult = score_decision_points(&t, &v);
        let (p, r, s) = decision_oracle(&v, &t);
        if !(close(got.precision, p) && close(got.recall, r) && close(got.score10, s)) {
            return Err(format!("decision case {i}: got {got:?}, oracle p={p} r={r} score={s}"));
        }
    }
    Ok(())
}

pub fn needle_table() -> BTreeMap<(bool, bool), f64> {
    BTreeMap::from([((false, false), 0.0), ((true, false), 0.5), ((false, true), 0.5), ((true, true), 1.0)])
}

pub fn needle_fixture() -> NeedleCase {
    match read_scenarios(&fixture("scenarios/needle.jsonl")).unwrap().remove(0) {
        Scenario::Needle(c) => c,
        _ => unreachable!("first needle fixture is a needle case"),
    }
}

pub fn oracle_needle(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::bundled();
    let case = needle_fixture();
    let table = needle_table();
    let pool = ["malaria", "typhoid", "tuberculosis", "brucellosis", "sepsis"];
    for i in 0..cases {
        let k = rng.gen_range(0..=4);
        let mut dx: Vec<String> = pool.choose_multiple(&mut rng, k).map(|s| s.to_string()).collect();
        let target_at = if rng.gen_bool(0.7) {
            let at = rng.gen_range(0..=dx.len());
            dx.insert(at, "visceral leishmaniasis".into());
            Some(at)
        } else {
            None
        };
        let rk39 = rng.gen_bool(0.7);
        let drug = rng.gen_bool(0.7);
        let clue = rng.gen_bool(0.5);
        let mut plan = String::from("Admit and monitor.");
        if rk39 {
            plan.push_str(" Do an rK39 rapid test.");
        }
        if drug {
            plan.push_str(" Start sodium stibogluconate.");
        }
        if clue {
            plan.push_str(" He lived in Bentiu last year.");
        }
        let text = format!("FINAL: Diagnosis: {}. Plan: {plan}", dx.join("; "));
        let mut t = transcript(ScenarioKind::Needle, &case.case_id);
        push(&mut t, Role::Harness, &case.narrative);
        push(&mut t, Role::Model, &text).is_final = true;
        t.final_answer = Some(answer(dx.clone(), &plan));
        let correct = target_at.is_some_and(|at| at < 3) && rk39 && drug;
        let expected = table[&(clue, correct)];
        let got: NeedleResult = score_needle(&t, &case, &vocab, &HashEmbedder, 0.75, 3).map_err(|e| e.to_string())?;
        if got.score != expected || got.clue_detected != clue || got.correct_diagnosis != correct {
            return Err(format!("needle case {i}: got {got:?}, expected clue={clue} correct={correct} score={expected}"));
        }
    }
    Ok(())
}

pub fn reverse_fixture() -> (PersonaSheet, Vec<guidebench::scenario::ClinicianQuestion>) {
    match read_scenarios(&fixture("scenarios/reverse.jsonl")).unwrap().remove(0) {
        Scenario::Reverse(r) => (r.persona, r.script),
        _ => unreachable!("reverse fixture holds a reverse scenario"),
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn oracle_reverse(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (persona, _) = reverse_fixture();
    let ids: Vec<String> = persona.facts.iter().map(|f| f.fact_id.clone()).collect();
    let pool = [
        "It has been 3 days now, I am so worried.",
        "Hakuna mkojo since this morning.",
        "She drinks when I give water.",
        "I am not sure, maybe twice.",
        "Thank you, she is playing again.",
        "No blood that I have seen.",
    ];
    for i in 0..cases {
        let q = rng.gen_range(1..=10);
        let mut t = transcript(ScenarioKind::Reverse, &persona.persona_id);
        let mut texts = Vec::new();
        for _ in 0..q {
            let k = rng.gen_range(0..=2);
            let mut asked: Vec<String> = ids.choose_multiple(&mut rng, k).cloned().collect();
            if rng.gen_bool(0.1) {
                asked.push("ghost".into());
            }
            let disclosed: Vec<String> = asked.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
            let text = *pool.choose(&mut rng).unwrap();
            texts.push(text);
            push(&mut t, Role::Harness, "question?").fact_ids = asked.clone();
            let turn = push(&mut t, Role::Model, text);
            turn.fact_ids = asked;
            turn.disclosed_fact_ids = disclosed;
            turn.contradiction = rng.gen_bool(0.15).then(|| "x".to_string());
        }
        // Independent recomputation from the raw turns.
        let model: Vec<&Turn> = t.turns.iter().filter(|x| x.role == Role::Model).collect();
        let c = model.iter().filter(|x| x.contradiction.is_some()).count() as f64;
        let consistency = (1.0 - c / q as f64).max(0.0);
        let asked: BTreeSet<&String> = model.iter().flat_map(|x| &x.fact_ids).filter(|id| ids.contains(id)).collect();
        let disclosed: BTreeSet<&String> = model.iter().flat_map(|x| &x.disclosed_fact_ids).collect();
        let completeness = if asked.is_empty() {
            1.0
        } else {
            asked.iter().filter(|a| disclosed.contains(*a)).count() as f64 / asked.len() as f64
        };
        let vecs: Vec<Vec<f64>> = texts.iter().map(|s| HashEmbedder::vector(s).unwrap()).collect();
        let mut mean = vec![0.0; vecs[0].len()];
        for v in &vecs {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x / vecs.len() as f64;
            }
        }
        let reference = HashEmbedder::vector(affect_reference(persona.affect)).unwrap();
        let style = (dot(&unit(mean), &reference)).clamp(0.0, 1.0);
        let eligible = asked.iter().any(|a| a.as_str() == "urine");
        let linguistic = if !eligible || texts.iter().any(|s| s.to_lowercase().contains("hakuna mkojo")) {
            1.0
        } else {
            0.0
        };
        let expected = 10.0 * (0.4 * consistency + 0.3 * completeness + 0.2 * style + 0.1 * linguistic);
        let got: ReverseResult = score_reverse(&t, &persona, &HashEmbedder, &ReverseWeights::default()).map_err(|e| e.to_string())?;
        if !close(got.composite10, expected) || !close(got.style_realism, style) {
            return Err(format!("reverse case {i}: got {got:?}, oracle {expected} (style {style})"));
        }
    }
    Ok(())
}

pub const ANTIGENS: [&str; 9] = ["Pentavalent", "Hexavalent", "PCV10", "PCV13", "OPV", "IPV", "RV", "BCG", "MenB"];

fn random_antigens(rng: &mut ChaCha8Rng) -> BTreeSet<String> {
    let k = rng.gen_range(0..=4);
    ANTIGENS.choose_multiple(rng, k).map(|s| s.to_string()).collect()
}

/// Jaccard by counting over the fixed universe.
fn jaccard_count(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let (mut inter, mut union) = (0, 0);
    for x in ANTIGENS {
        let (ia, ib) = (a.contains(x), b.contains(x));
        inter += (ia && ib) as usize;
        union += (ia || ib) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn oracle_cas(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::bundled();
    let forms = ["Pentavalent", "Hexavalent", ""];
    for i in 0..cases {
        let (pred, req) = (random_antigens(&mut rng), random_antigens(&mut rng));
        let (pf, kf) = (*forms.choose(&mut rng).unwrap(), *forms.choose(&mut rng).unwrap());
        let mut counselling = vec!["Counsel the caregiver.".to_string()];
        let mut constraints = Vec::new();
        let mut respected = 0;
        for c in 0..rng.gen_range(0..=3) {
            let term = format!("qzterm{c}");
            let included = rng.gen_bool(0.5);
            if included {
                counselling.push(format!("Note {term}."));
            }
            let avoid = rng.gen_bool(0.5);
            respected += (avoid != included) as usize;
            let spec = format!("{} {term}", if avoid { "avoid" } else { "mention" });
            constraints.push(ResourceConstraint::parse(&spec).unwrap());
        }
        let mut factors = Vec::new();
        let mut any_factor = false;
        for f in 0..rng.gen_range(0..=3) {
            factors.push(format!("lcfac{f}"));
            if rng.gen_bool(0.4) {
                counselling.push(format!("Local lcfac{f}."));
                any_factor = true;
            }
        }
        let n_constraints = constraints.len();
        let key = GeoAnswerKey {
            required_antigens: req.clone(),
            formulation: kf.into(),
            resource_constraints: constraints,
            locale_factors: factors.clone(),
        };
        let ans = GeoAnswer {
            locale: "X".into(),
            antigens: pred.clone(),
            formulation: pf.into(),
            counselling: counselling.join(" "),
            method: ExtractionMethod::Extracted,
        };
        let j = jaccard_count(&pred, &req);
        let form = if pf.to_lowercase() == kf.to_lowercase() { 1.0 } else { 0.0 };
        let res = if n_constraints == 0 { 1.0 } else { respected as f64 / n_constraints as f64 };
        let rat = if factors.is_empty() || any_factor { 1.0 } else { 0.0 };
        let expected = 10.0 * (0.35 * j + 0.25 * form + 0.25 * res + 0.15 * rat);
        let got = score_cas(&ans, &key, &vocab, &CasWeights::default());
        if !close(got.cas10, expected) || !close(got.antigen_accuracy, j) {
            return Err(format!("cas case {i}: got {got:?}, oracle {expected}"));
        }
        let (pb, rb) = (random_antigens(&mut rng), random_antigens(&mut rng));
        let (ca, cb) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let d_expected = (ca + cb) / 2.0 - 10.0 * (jaccard_count(&pred, &pb) - jaccard_count(&req, &rb)).max(0.0);
        let d = delta_cas(ca, cb, &pred, &pb, &req, &rb);
        if !close(d, d_expected) {
            return Err(format!("delta_cas case {i}: got {d}, oracle {d_expected}"));
        }
    }
    Ok(())
}

pub fn oracle_cbst(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::bundled();
    for i in 0..cases {
        let m = rng.gen_range(0..=4);
        let differential: Vec<String> = std::iter::once("zorbitis".to_string())
            .chain((1..=m).map(|k| format!("dd{k}")))
            .collect();
        let actions: Vec<String> = (0..rng.gen_range(0..=4)).map(|k| format!("act{k}")).collect();
        let case = BiasCase {
            case_id: "b".into(),
            bias_type: BiasType::Anchoring,
            stage1: "stage one text".into(),
            anchor_diagnosis: "quaxitis".into(),
            stage2_red_flag: "qqflag wibble frindle snarkle plumbus grommet".into(),
            red_flag_terms: vec!["redterm".into()],
            correct_diagnosis: "zorbitis".into(),
            confirmatory_actions: actions.clone(),
            reasoning_chain: vec![],
            expected_differential: differential.clone(),
            expected_count: rng.gen_range(1..=5),
        };
        let first = *["zorbitis", "quaxitis", "dd1"].choose(&mut rng).unwrap();
        let mut dx = vec![first.to_string()];
        dx.extend(differential.iter().filter(|_| rng.gen_bool(0.5)).cloned());
        let done: Vec<&String> = actions.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let red = rng.gen_bool(0.5);
        let mut plan = format!("Plan: {}.", done.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" and "));
        if red {
            plan.push_str(" The redterm matters.");
        }
        let mut t = transcript(ScenarioKind::Bias, "b");
        push(&mut t, Role::Harness, "stage 1");
        push(&mut t, Role::Model, "Diagnosis: quaxitis.");
        push(&mut t, Role::Harness, "stage 2");
        push(&mut t, Role::Model, &format!("Diagnosis: {}. {plan}", dx.join("; "))).is_final = true;
        t.stage_answers = vec![answer(vec!["quaxitis".into()], ""), answer(dx.clone(), &plan)];
        let flex = first == "zorbitis";
        let named: BTreeSet<&String> = differential.iter().filter(|d| dx.contains(d)).collect();
        let breadth = (named.len() as f64 / case.expected_count as f64).min(1.0);
        let action = if actions.is_empty() { 1.0 } else { done.len() as f64 / actions.len() as f64 };
        let expected = 10.0
            * (0.40 * flex as u8 as f64 + 0.25 * red as u8 as f64 + 0.20 * breadth + 0.15 * action);
        let got: CbstResult =
            score_cbst(&t, &case, &vocab, &HashEmbedder, 0.75, &CbstWeights::default()).map_err(|e| e.to_string())?;
        if !close(got.cbst10, expected) {
            return Err(format!("cbst case {i}: got {got:?}, oracle {expected}"));
        }
    }
    Ok(())
}

pub fn check_oracle_suite() -> Result<String, String> {
    let start = Instant::now();
    oracle_decision(1000, 1)?;
    oracle_needle(1000, 2)?;
    oracle_reverse(1000, 3)?;
    oracle_cas(1000, 4)?;
    oracle_cbst(1000, 5)?;
    let took = start.elapsed();
    if took > Duration::from_secs(30) {
        return Err(format!("oracle suite took {took:?}"));
    }
    Ok(format!("5 metrics x 1000 cases within {TOL:e}, {:.2}s", took.as_secs_f64()))
}

// ---------------------------------------------------------------- goldens

pub fn check_goldens() -> Result<String, String> {
    let mut fails = Vec::new();
    let d = DecisionPointResult::from_counts(4, 4, 3);
    if d.score10 != 7.5 {
        fails.push(format!("decision {}", d.score10));
    }
    let r = ReverseResult::from_components(1, 8, 0.9, 0.8, 1.0, &ReverseWeights::default());
    if !close(r.composite10, 8.8) {
        fails.push(format!("reverse {}", r.composite10));
    }
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let j = jaccard(&set(&["Pentavalent", "PCV13"]), &set(&["Pentavalent", "PCV10", "OPV"]));
    if j != 0.25 {
        fails.push(format!("cas jaccard {j}"));
    }
    let c = CbstResult::from_components(true, true, 0.5, 0.0, &CbstWeights::default());
    if c.cbst10 != 7.5 {
        fails.push(format!("cbst {}", c.cbst10));
    }
    let table: BTreeSet<u64> = [(false, false), (true, false), (false, true), (true, true)]
        .iter()
        .map(|&(a, b)| NeedleResult::from_flags(a, b).score.to_bits())
        .collect();
    let want: BTreeSet<u64> = [0.0f64, 0.5, 1.0].iter().map(|x| x.to_bits()).collect();
    if table != want {
        fails.push("needle table".into());
    }
    if fails.is_empty() {
        Ok(format!("7.5 / {} / 0.25 / 7.5 / {{0, 0.5, 1}}", r.composite10))
    } else {
        Err(fails.join("; "))
    }
}

// ---------------------------------------------------------------- geo

pub fn check_geo_keys() -> Result<String, String> {
    let pair = build_geo_pair(&bundled_schedule(), 10, "Kenya", "South Africa", &GeoTemplate::bundled())
        .map_err(|e| e.to_string())?;
    let a: Vec<&str> = pair.scenario_a.answer_key.required_antigens.iter().map(String::as_str).collect();
    let b: Vec<&str> = pair.scenario_b.answer_key.required_antigens.iter().map(String::as_str).collect();
    let want_a = BTreeSet::from(["Pentavalent", "PCV10", "OPV"]);
    let want_b = BTreeSet::from(["Hexavalent", "PCV13", "RV"]);
    if a.iter().copied().collect::<BTreeSet<_>>() != want_a || b.iter().copied().collect::<BTreeSet<_>>() != want_b {
        return Err(format!("Kenya {a:?}, South Africa {b:?}"));
    }
    Ok(format!("Kenya {a:?}; South Africa {b:?}"))
}

// ---------------------------------------------------------------- e2e

pub fn run_fixture_evaluation(out: &Path) -> guidebench::Result<()> {
    let scenarios = all_scenarios();
    let model = ScriptedMock::load(&fixture("mock/evaluate_script.json"))?;
    let eval = evaluate(&scenarios, &model, &HashEmbedder, &Vocabulary::bundled(), &EvaluationOptions::default())?;
    write_outputs(&eval, out)
}

pub fn check_e2e() -> Result<String, String> {
    let start = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_fixture_evaluation(d.path()).map_err(|e| e.to_string())?;
    }
    let took = start.elapsed();
    for name in ["report.json", "report.md", "cases.csv"] {
        let got = std::fs::read(dirs[0].path().join(name)).unwrap();
        let again = std::fs::read(dirs[1].path().join(name)).unwrap();
        let golden = std::fs::read(fixture(&format!("golden/{name}"))).unwrap();
        if got != again {
            return Err(format!("{name} differs between runs"));
        }
        if got != golden {
            return Err(format!("{name} differs from golden"));
        }
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].path().join("report.json")).unwrap()).unwrap();
    let sections = report["sections"].as_array().map_or(0, Vec::len);
    if sections != 5 {
        return Err(format!("{sections} sections"));
    }
    if took > Duration::from_secs(10) {
        return Err(format!("two runs took {took:?}"));
    }
    Ok(format!("5 sections, byte-identical to golden over 2 runs, {:.2}s", took.as_secs_f64()))
}

// ---------------------------------------------------------------- grammar

const TEXT_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,.?()-'%/";

fn random_text(rng: &mut ChaCha8Rng, max: usize) -> String {
    let len = rng.gen_range(1..=max);
    let mut s: String = (0..len).map(|_| TEXT_CHARS[rng.gen_range(0..TEXT_CHARS.len())] as char).collect();
    s = s.trim().to_string();
    if s.is_empty() {
        s.push('x');
    }
    s
}

pub fn random_block(rng: &mut ChaCha8Rng) -> ParsedBlock {
    ParsedBlock {
        question: random_text(rng, 120),
        options: Options::from_array([
            random_text(rng, 40),
            random_text(rng, 40),
            random_text(rng, 40),
            random_text(rng, 40),
        ]),
        correct: Letter::ALL[rng.gen_range(0..4)],
        explanation: rng.gen_bool(0.5).then(|| random_text(rng, 80)),
    }
}

/// Rendered text with the line starting `prefix` removed.
pub fn drop_line(rendered: &str, prefix: &str) -> String {
    rendered
        .lines()
        .filter(|l| !l.starts_with(prefix))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn check_parser_roundtrip(cases: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mutations = 0;
    for i in 0..cases {
        let block = random_block(&mut rng);
        let text = render_block(&block);
        let parsed = parse_mcq_output(&text).map_err(|e| format!("case {i}: {e}"))?;
        if parsed.blocks != vec![block.clone()] || !parsed.diagnostics.is_empty() {
            return Err(format!("case {i}: round trip changed {block:?}"));
        }
        let no_correct = parse_lenient(&drop_line(&text, "Correct:"));
        if !no_correct.blocks.is_empty()
            || no_correct.diagnostics.first().map(|d| d.rule) != Some(ParseRule::MissingCorrectTerminator)
        {
            return Err(format!("case {i}: dropping Correct gave {:?}", no_correct.diagnostics));
        }
        let letter = Letter::ALL[rng.gen_range(0..4)];
        let dropped = parse_lenient(&drop_line(&text, &format!("{letter})")));
        if !dropped.blocks.is_empty() || dropped.diagnostics.first().map(|d| d.rule) != Some(ParseRule::MissingOption(letter)) {
            return Err(format!("case {i}: dropping option {letter} gave {:?}", dropped.diagnostics));
        }
        if parse_mcq_output(&drop_line(&text, "Correct:")).is_ok() {
            return Err(format!("case {i}: strict parse accepted a block without Correct"));
        }
        mutations += 2;
    }
    Ok(format!("{cases} round trips, {mutations} mutations rejected with named rules"))
}

// ---------------------------------------------------------------- corpus

fn random_word(rng: &mut ChaCha8Rng) -> String {
    const W: [&str; 12] = [
        "fever", "child", "dose", "refer", "oral", "review", "malaria", "test", "clinic", "days", "weight", "fluid",
    ];
    W.choose(rng).unwrap().to_string()
}

/// Random marker-text document: parts, sections, subsections, page
/// markers and paragraphs of 1-120 words with sentence breaks.
pub fn random_corpus(rng: &mut ChaCha8Rng, version: &str) -> String {
    let mut s = format!("@doc_id: rand\n@version: {version}\n");
    let mut page = 1;
    for p in 0..rng.gen_range(1..=3) {
        s.push_str(&format!("#PART P{p}: Part {p}\n"));
        for sec in 0..rng.gen_range(1..=3) {
            s.push_str(&format!("##SECTION S{p}{sec}\n"));
            let subs = rng.gen_range(0..=2);
            for sub in 0..=subs {
                if subs > 0 {
                    s.push_str(&format!("###SUBSECTION Sub{sub}\n"));
                }
                if rng.gen_bool(0.5) {
                    page += 1;
                    s.push_str(&format!("[[page={page}]]\n"));
                }
                for _ in 0..rng.gen_range(1..=3) {
                    let n = rng.gen_range(1..=120);
                    let words: Vec<String> = (0..n)
                        .map(|k| {
                            let w = random_word(rng);
                            if k % 9 == 8 { format!("{w}.") } else { w }
                        })
                        .collect();
                    s.push_str(&words.join(" "));
                    s.push_str(".\n\n");
                }
            }
        }
    }
    s
}

fn paragraph_words(blocks: &[Block]) -> Vec<String> {
    blocks
        .iter()
        .filter_map(|b| match b {
            Block::Paragraph { text, .. } => Some(text.split_whitespace().map(String::from).collect::<Vec<_>>()),
            _ => None,
        })
        .flatten()
        .collect()
}

pub fn check_corpus_properties(cases: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        let text = random_corpus(&mut rng, "v1");
        let cfg = ChunkConfig {
            min_words: rng.gen_range(1..=60),
            max_words: rng.gen_range(60..=200),
        };
        let doc = parse_marker_text(&text).map_err(|e| format!("case {i}: {e}"))?;
        let a = chunk_document(&doc, cfg).map_err(|e| format!("case {i}: {e}"))?;
        let b = chunk_document(&parse_marker_text(&text).unwrap(), cfg).unwrap();
        if a != b {
            return Err(format!("case {i}: chunking not deterministic"));
        }
        let rebuilt: Vec<String> = a.iter().flat_map(|c| c.text.split_whitespace().map(String::from)).collect();
        if rebuilt != paragraph_words(&doc.blocks) {
            return Err(format!("case {i}: chunks do not reconstruct the body text"));
        }
        let dist = part_distribution(&a).map_err(|e| e.to_string())?;
        let sum: f64 = dist.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("case {i}: distribution sums to {sum}"));
        }
        if !diff_versions(&a, &a).is_empty() {
            return Err(format!("case {i}: diff(x, x) is not empty"));
        }
    }
    Ok(format!("{cases} random corpora: deterministic, reconstructing, sum 1, diff(x,x) empty"))
}

// ---------------------------------------------------------------- bootstrap

pub fn bernoulli_coverage(trials: usize, n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .filter(|t| {
            let s: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
            let ci = bootstrap_ci(&s, 1000, 0.95, *t as u64).unwrap();
            ci.ci_low <= 0.5 && 0.5 <= ci.ci_high
        })
        .count()
}

pub fn check_bootstrap() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s: Vec<f64> = (0..50).map(|_| rng.gen_range(0.0..10.0)).collect();
    let (a, b) = (bootstrap_ci(&s, 1000, 0.95, 7).unwrap(), bootstrap_ci(&s, 1000, 0.95, 7).unwrap());
    if a.ci_low.to_bits() != b.ci_low.to_bits() || a.ci_high.to_bits() != b.ci_high.to_bits() {
        return Err("same seed gave different endpoints".into());
    }
    let flat = bootstrap_ci(&[3.25; 40], 1000, 0.95, 1).unwrap();
    if flat.ci_low != flat.ci_high || flat.ci_low != 3.25 {
        return Err(format!("degenerate sample gave [{}, {}]", flat.ci_low, flat.ci_high));
    }
    let covered = bernoulli_coverage(200, 100, 2024);
    if covered < 180 {
        return Err(format!("coverage {covered}/200"));
    }
    Ok(format!("reproducible, zero-width degenerate, coverage {covered}/200"))
}

// ---------------------------------------------------------------- review

pub const REVIEWER_TOKENS: &str = "rev-amina=tok-amina,rev-otieno=tok-otieno";
pub const ADMIN_TOKEN: &str = "tok-admin";

pub fn review_items() -> Vec<guidebench::generation::McqItem> {
    guidebench::generation::read_items(&fixture("review/items.jsonl")).unwrap()
}

pub fn reviewers() -> Vec<String> {
    guidebench::review::read_reviewers(&fixture("review/reviewers.jsonl")).unwrap()
}

pub struct Server {
    pub base: String,
    pub board: Arc<ReviewBoard>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Server {
    pub fn start(board: ReviewBoard) -> Self {
        let board = Arc::new(board);
        let tokens = Arc::new(Tokens::parse(REVIEWER_TOKENS, Some(ADMIN_TOKEN)).unwrap());
        let (stop, rx) = tokio::sync::oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let b = board.clone();
        let handle = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                serve(listener, b, tokens, async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv().unwrap();
        Self {
            base: format!("http://{addr}"),
            board,
            stop: Some(stop),
            handle: Some(handle),
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub fn client() -> reqwest::blocking::Client {
    reqwest::blocking::Client::new()
}

/// Reviewer scores keyed by item position: amina rates all items well,
/// otieno rates item 2 poorly and item 3 with one low criterion.
pub fn scripted_rubric(reviewer: &str, item_id: &str) -> RubricScore {
    let good = RubricScore::uniform(5);
    match (reviewer, item_id) {
        ("rev-otieno", "itm-review-002") => RubricScore::uniform(1),
        ("rev-otieno", "itm-review-003") => RubricScore {
            guideline_alignment: 2,
            ..RubricScore::uniform(4)
        },
        ("rev-otieno", "itm-review-004") => RubricScore::uniform(4),
        _ => good,
    }
}

pub fn expected_verdicts() -> BTreeMap<&'static str, (Verdict, bool)> {
    BTreeMap::from([
        ("itm-review-001", (Verdict::Accepted, false)),
        // Means 3.0 everywhere: not below the reject floor, not acceptable.
        ("itm-review-002", (Verdict::Revise, true)),
        // Alignment mean 3.5 misses the 4.0 accept bar.
        ("itm-review-003", (Verdict::Revise, true)),
        ("itm-review-004", (Verdict::Accepted, false)),
    ])
}

pub fn build_board(seed: u64) -> ReviewBoard {
    let assignments = assign_blinded(&review_items(), &[], &reviewers(), 2, seed).unwrap();
    ReviewBoard::new(review_items(), assignments, 2, DecisionThresholds::default()).unwrap()
}

/// Scores every assignment over HTTP and returns the decisions JSON plus
/// the status of a repeated submission.
pub fn scripted_review_session(seed: u64) -> Result<(usize, serde_json::Value, u16), String> {
    let server = Server::start(build_board(seed));
    let http = client();
    let tok = |r: &str| format!("tok-{}", r.trim_start_matches("rev-"));
    let health: serde_json::Value = http
        .get(format!("{}/api/health", server.base))
        .send()
        .and_then(|r| r.json())
        .map_err(|e| e.to_string())?;
    if health["status"] != "ready" {
        return Err(format!("health {health}"));
    }
    let mut n = 0;
    let mut first = None;
    for r in reviewers() {
        let queue: serde_json::Value = http
            .get(format!("{}/api/reviewers/{r}/queue", server.base))
            .bearer_auth(tok(&r))
            .send()
            .and_then(|x| x.json())
            .map_err(|e| e.to_string())?;
        for a in queue["assignments"].as_array().cloned().unwrap_or_default() {
            if a.get("source").is_some() || a.get("item_id").is_some() {
                return Err("masked payload leaks provenance".into());
            }
            let id = a["assignment_id"].as_str().unwrap().to_string();
            let item = server.board.assignment(&id).map_err(|e| e.to_string())?.item_id;
            let resp = http
                .post(format!("{}/api/assignments/{id}/score", server.base))
                .bearer_auth(tok(&r))
                .json(&scripted_rubric(&r, &item))
                .send()
                .map_err(|e| e.to_string())?;
            if !resp.status().is_success() {
                return Err(format!("score {id}: {}", resp.status()));
            }
            first.get_or_insert((id, r.clone(), item));
            n += 1;
        }
    }
    let (id, r, item) = first.ok_or("no assignments")?;
    let again = http
        .post(format!("{}/api/assignments/{id}/score", server.base))
        .bearer_auth(tok(&r))
        .json(&scripted_rubric(&r, &item))
        .send()
        .map_err(|e| e.to_string())?
        .status()
        .as_u16();
    let decisions: serde_json::Value = http
        .get(format!("{}/api/decisions", server.base))
        .bearer_auth(ADMIN_TOKEN)
        .send()
        .and_then(|x| x.json())
        .map_err(|e| e.to_string())?;
    Ok((n, decisions, again))
}

pub fn check_review_workflow() -> Result<String, String> {
    let assignments = assign_blinded(&review_items(), &[], &reviewers(), 2, 42).map_err(|e| e.to_string())?;
    if assignments.len() != 8 {
        return Err(format!("{} assignments", assignments.len()));
    }
    let (n, decisions, again) = scripted_review_session(42)?;
    let (_, decisions2, _) = scripted_review_session(42)?;
    if n != 8 || again != 409 {
        return Err(format!("scored {n}, double submit returned {again}"));
    }
    if decisions != decisions2 {
        return Err("decisions differ between identical sessions".into());
    }
    let want = expected_verdicts();
    for d in decisions.as_array().cloned().unwrap_or_default() {
        let id = d["item_id"].as_str().unwrap_or_default();
        let verdict: Verdict = serde_json::from_value(d["decision"].clone()).map_err(|e| e.to_string())?;
        let dissent = d["dissent_flag"].as_bool().unwrap_or_default();
        if want.get(id) != Some(&(verdict, dissent)) {
            return Err(format!("{id}: {verdict:?} dissent={dissent}"));
        }
    }
    if decisions.as_array().map_or(0, Vec::len) != 4 {
        return Err(format!("decisions: {decisions}"));
    }
    Ok("8 blinded assignments scored over HTTP, 4 deterministic decisions, double submit 409".into())
}

pub fn words(s: &str) -> usize {
    tokens(s).len()
}
