//! Command-line entry point: `ingest`, `generate`, `review-serve`,
//! `evaluate` and `diff-guideline`.

use std::collections::BTreeSet;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::config::{BackendConfig, RunConfig};
use crate::corpus::{
    chunk_document, diff_versions, parse_marker_text, part_distribution, read_chunks, write_chunks, GuidelineDoc,
};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, write_outputs, EvaluationOptions};
use crate::generation::{
    generate_batch, mark_stale, read_items, select_for_translation, translate_item, write_items, ItemSource,
};
use crate::retrieval::build_indexes;
use crate::review::{assign_blinded, read_reviewers, serve, ReviewAssignment, ReviewBoard, Tokens};
use crate::scenario::{read_scenarios, ScenarioKind};
use crate::vocab::Vocabulary;

#[derive(Debug, Parser)]
#[command(name = "guidebench", version, about = "Guideline-grounded benchmark forge and LLM evaluation harness")]
pub struct Cli {
    /// TOML run configuration; `${VAR}` is replaced from the environment.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Concept vocabulary JSON replacing the bundled one.
    #[arg(long, global = true)]
    pub vocabulary: Option<PathBuf>,
    /// Log verbosity (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse guideline marker text into a chunk store.
    Ingest(IngestArgs),
    /// Generate audited MCQ items from a chunk store.
    Generate(GenerateArgs),
    /// Serve the blinded review API.
    ReviewServe(ReviewArgs),
    /// Run scenarios against a candidate model and write a report.
    Evaluate(EvaluateArgs),
    /// Compare two chunk stores and flag items citing changed chunks.
    DiffGuideline(DiffArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub doc: PathBuf,
    /// Output chunk store (JSONL). Document metadata goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub min_words: Option<usize>,
    #[arg(long)]
    pub max_words: Option<usize>,
    /// Also build and save a hybrid retrieval index snapshot.
    #[arg(long)]
    pub index: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub chunks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Mock script; overrides the configured generation backend.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub n_per_chunk: Option<usize>,
    #[arg(long)]
    pub total_cap: Option<usize>,
    #[arg(long)]
    pub translate_fraction: Option<f64>,
    /// Guideline version tag; defaults to the store's metadata.
    #[arg(long)]
    pub guideline_version: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReviewArgs {
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub distractors: Option<PathBuf>,
    /// JSONL of `{"reviewer_id": ...}`.
    #[arg(long)]
    pub reviewers: PathBuf,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub redundancy: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for `assignments.jsonl` and the append-only `scores.jsonl`.
    #[arg(long)]
    pub state_dir: PathBuf,
    /// Decisions JSONL written on shutdown.
    #[arg(long)]
    pub decisions_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Scenario JSONL files.
    #[arg(long = "scenarios", num_args = 1..)]
    pub scenarios: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Mock script; overrides the configured candidate backend.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Comma-separated subset: decision, needle, reverse, geo, bias.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    #[arg(long)]
    pub old: PathBuf,
    #[arg(long)]
    pub new: PathBuf,
    /// Item store to check for stale citations; rewritten in place unless
    /// `--items-out` is given.
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long)]
    pub items_out: Option<PathBuf>,
    /// Write the change set as JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Document metadata stored beside a chunk store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub doc: GuidelineDoc,
    pub chunk_count: usize,
}

pub fn meta_path(store: &Path) -> PathBuf {
    let mut s = store.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_vocab(path: Option<&Path>) -> Result<Vocabulary> {
    path.map_or_else(|| Ok(Vocabulary::bundled()), Vocabulary::load)
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let vocab = load_vocab(cli.vocabulary.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(a, &cfg, out),
        Command::Generate(a) => generate(a, &cfg, out),
        Command::ReviewServe(a) => review_serve(a, &cfg, out),
        Command::Evaluate(a) => run_evaluate(a, &cfg, &vocab, out),
        Command::DiffGuideline(a) => diff_guideline(a, out),
    }
}

fn ingest(a: IngestArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(&a.doc).map_err(|e| Error::io(&a.doc, e))?;
    let doc = parse_marker_text(&text)?;
    let mut chunking = cfg.chunking;
    chunking.min_words = a.min_words.unwrap_or(chunking.min_words);
    chunking.max_words = a.max_words.unwrap_or(chunking.max_words);
    let chunks = chunk_document(&doc, chunking)?;
    write_chunks(&a.out, &chunks)?;
    let meta = StoreMeta {
        doc: doc.clone(),
        chunk_count: chunks.len(),
    };
    let mp = meta_path(&a.out);
    let body = serde_json::to_string_pretty(&meta).map_err(|e| Error::json("store metadata", e))?;
    std::fs::write(&mp, body).map_err(|e| Error::io(&mp, e))?;
    if let Some(ip) = &a.index {
        let embedder = cfg.backends.embedding.build()?;
        build_indexes(&chunks, embedder.as_ref())?.save(ip)?;
    }
    emit(out, format!("chunks: {}", chunks.len()))?;
    for (part, frac) in part_distribution(&chunks)? {
        emit(out, format!("  {part}: {frac:.4}"))?;
    }
    Ok(())
}

fn generate(a: GenerateArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let chunks = read_chunks(&a.chunks)?;
    let version = match a.guideline_version {
        Some(v) => v,
        None => {
            let mp = meta_path(&a.chunks);
            let body = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
            let meta: StoreMeta = serde_json::from_str(&body).map_err(|e| Error::json(mp.display().to_string(), e))?;
            meta.doc.version_tag
        }
    };
    let backend_cfg = match a.script {
        Some(script) => BackendConfig::Scripted { script },
        None => cfg.backends.generation.clone().unwrap_or(BackendConfig::Template),
    };
    let backend = backend_cfg.build()?;
    let mut gcfg = cfg.generation.clone();
    gcfg.n_per_chunk = a.n_per_chunk.unwrap_or(gcfg.n_per_chunk);
    gcfg.total_cap = a.total_cap.or(gcfg.total_cap);
    gcfg.translate_fraction = a.translate_fraction.unwrap_or(gcfg.translate_fraction);
    gcfg.parallelism = cfg.parallelism;
    let outcome = generate_batch(&chunks, backend.as_ref(), &gcfg, &version)?;
    for d in &outcome.diagnostics {
        warn!("{d}");
    }
    let mut items = outcome.items;
    if items.is_empty() {
        warn!("no items survived generation and quota");
    }
    let mut translated = Vec::new();
    for it in select_for_translation(&items, gcfg.translate_fraction) {
        match translate_item(it, backend.as_ref()) {
            Ok(t) => translated.push(t),
            Err(e) => warn!(item = %it.item_id, "translation skipped: {e}"),
        }
    }
    let n_translated = translated.len();
    items.extend(translated);
    write_items(&a.out, &items)?;
    emit(out, format!("items: {} ({n_translated} translated)", items.len()))
}

fn review_serve(a: ReviewArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let items = read_items(&a.items)?;
    let distractors = match &a.distractors {
        Some(p) => read_items(p)?,
        None => Vec::new(),
    };
    let reviewers = read_reviewers(&a.reviewers)?;
    let tokens = Tokens::from_env()?;
    let known: BTreeSet<String> = tokens.reviewers().into_iter().collect();
    if let Some(r) = reviewers.iter().find(|r| !known.contains(*r)) {
        return Err(Error::Config(format!("reviewer {r} has no token in the secret map")));
    }
    let redundancy = a.redundancy.unwrap_or(cfg.review.redundancy);
    std::fs::create_dir_all(&a.state_dir).map_err(|e| Error::io(&a.state_dir, e))?;
    let table = a.state_dir.join("assignments.jsonl");
    let assignments: Vec<ReviewAssignment> = if table.exists() {
        crate::jsonl::read(&table)?
    } else {
        let fresh = assign_blinded(&items, &distractors, &reviewers, redundancy, a.seed.unwrap_or(cfg.seed))?;
        crate::jsonl::write(&table, &fresh)?;
        fresh
    };
    let all = items.into_iter().chain(distractors.into_iter().map(|mut d| {
        d.source = ItemSource::External;
        d
    }));
    let board = Arc::new(
        ReviewBoard::new(all, assignments, redundancy, cfg.review.thresholds)?
            .with_score_log(&a.state_dir.join("scores.jsonl"))?,
    );
    let port = a.port.unwrap_or(cfg.review.port);
    let addr: SocketAddr = format!("{}:{port}", a.host)
        .parse()
        .map_err(|e| Error::Config(format!("listen address: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Service(e.to_string()))?;
    let listener = rt
        .block_on(tokio::net::TcpListener::bind(addr))
        .map_err(|e| Error::Service(format!("cannot listen on {addr}: {e}")))?;
    let local = listener.local_addr().map_err(|e| Error::Service(e.to_string()))?;
    info!("review service listening on http://{local}");
    emit(out, format!("listening on http://{local}"))?;
    out.flush().map_err(|e| Error::io("<stdout>", e))?;
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    rt.block_on(serve(listener, board.clone(), Arc::new(tokens), shutdown))?;
    if let Some(p) = &a.decisions_out {
        let decisions = board.decisions()?;
        crate::jsonl::write(p, &decisions)?;
        emit(out, format!("decisions: {} written to {}", decisions.len(), p.display()))?;
    }
    Ok(())
}

fn run_evaluate(a: EvaluateArgs, cfg: &RunConfig, vocab: &Vocabulary, out: &mut dyn Write) -> Result<()> {
    let files = if a.scenarios.is_empty() {
        cfg.paths.scenarios.clone()
    } else {
        a.scenarios
    };
    if files.is_empty() {
        return Err(Error::Config("no scenario files given".into()));
    }
    let mut scenarios = Vec::new();
    for f in &files {
        scenarios.extend(read_scenarios(f)?);
    }
    let metrics = if a.metrics.is_empty() {
        None
    } else {
        Some(
            a.metrics
                .iter()
                .map(|m| m.trim().parse::<ScenarioKind>())
                .collect::<Result<BTreeSet<_>>>()?,
        )
    };
    let backend_cfg = match a.script {
        Some(script) => BackendConfig::Scripted { script },
        None => cfg
            .backends
            .candidate
            .clone()
            .ok_or_else(|| Error::Config("no candidate backend configured; pass --script or set backends.candidate".into()))?,
    };
    let model = backend_cfg.build()?;
    let embedder = cfg.backends.embedding.build()?;
    let mut bootstrap = cfg.bootstrap_settings();
    bootstrap.seed = a.seed.unwrap_or(bootstrap.seed);
    bootstrap.resamples = a.resamples.unwrap_or(bootstrap.resamples);
    bootstrap.level = a.level.unwrap_or(bootstrap.level);
    let opts = EvaluationOptions {
        metrics,
        parallelism: cfg.parallelism,
        metric_config: cfg.metrics,
        bootstrap,
        logical_clock: backend_cfg.is_deterministic(),
    };
    let eval = evaluate(&scenarios, model.as_ref(), embedder.as_ref(), vocab, &opts)?;
    let out_dir = a
        .out_dir
        .or_else(|| cfg.paths.reports.clone())
        .ok_or_else(|| Error::Config("no output directory; pass --out-dir".into()))?;
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    write_outputs(&eval, &out_dir)?;
    for s in &eval.report.sections {
        emit(
            out,
            format!(
                "{}: {} mean {:.4} [{:.4}, {:.4}] n={}",
                s.metric, s.score_name, s.summary.mean, s.summary.ci_low, s.summary.ci_high, s.summary.n
            ),
        )?;
    }
    if !eval.report.unscored.is_empty() {
        emit(out, format!("unscored: {}", eval.report.unscored.join(", ")))?;
    }
    Ok(())
}

fn diff_guideline(a: DiffArgs, out: &mut dyn Write) -> Result<()> {
    let old = read_chunks(&a.old)?;
    let new = read_chunks(&a.new)?;
    let mut changes = diff_versions(&old, &new);
    if let Some(ip) = &a.items {
        let mut items = read_items(ip)?;
        let stale = mark_stale(&mut items, &mut changes);
        if !stale.is_empty() {
            write_items(a.items_out.as_deref().unwrap_or(ip), &items)?;
        }
        for id in &stale {
            emit(out, format!("stale: {id}"))?;
        }
    }
    if changes.is_empty() && changes.affected_items.is_empty() {
        return Ok(());
    }
    let body = serde_json::to_string_pretty(&changes).map_err(|e| Error::json("change set", e))?;
    match &a.out {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::io(p, e)),
        None => emit(out, body),
    }
}

/// Parse arguments, run, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level)),
        )
        .with_writer(std::io::stderr)
        .try_init();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
