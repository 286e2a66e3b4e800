//! C ABI over `guidebench`: opaque corpus and index handles, status codes
//! with a per-thread error message, and JSON string outputs.
//!
//! Strings returned through `out` pointers are owned by the caller and must
//! be released with [`gb_string_free`]. Handles are released with their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use guidebench::corpus::{chunk_document, diff_versions, parse_marker_text, part_distribution, read_chunks, ChunkConfig, GuidelineChunk};
use guidebench::evaluate::score_transcript;
use guidebench::harness::Transcript;
use guidebench::metrics::{bootstrap_ci, MetricConfig};
use guidebench::retrieval::{build_indexes, search, HashEmbedder, HybridIndex};
use guidebench::scenario::Scenario;
use guidebench::vocab::Vocabulary;
use guidebench::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    EmptyInput = 3,
    Structure = 4,
    Validation = 5,
    Precondition = 6,
    NotFound = 7,
    Config = 8,
    Parse = 9,
    DataGap = 10,
    Backend = 11,
    Io = 12,
    Other = 13,
    Panic = 14,
}

impl From<&Error> for GbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::EmptyInput(_) => GbStatus::EmptyInput,
            Error::Structure(_) => GbStatus::Structure,
            Error::Validation(_) => GbStatus::Validation,
            Error::Precondition(_) => GbStatus::Precondition,
            Error::NotFound(_) => GbStatus::NotFound,
            Error::Config(_) => GbStatus::Config,
            Error::McqParse(_) | Error::TranslationParse(_) | Error::ForgeParse(_) | Error::Json { .. } => {
                GbStatus::Parse
            }
            Error::DataGap(_) => GbStatus::DataGap,
            Error::Backend { .. } | Error::BatchFailed(_) => GbStatus::Backend,
            Error::IndexBuild { source, .. } => GbStatus::from(source.as_ref()),
            Error::Io { .. } => GbStatus::Io,
            _ => GbStatus::Other,
        }
    }
}

/// Opaque chunk store.
pub struct GbCorpus {
    chunks: Vec<GuidelineChunk>,
}

/// Opaque hybrid retrieval index built with the hash embedder.
pub struct GbIndex {
    index: HybridIndex,
}

/// Bootstrap summary of a sample mean.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GbInterval {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(GbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(GbStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> GbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GbStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            GbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GbStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(GbStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, value: &impl serde::Serialize) -> FfiResult<()> {
    let body = serde_json::to_string(value).map_err(|e| Fail(GbStatus::Other, e.to_string()))?;
    let c = CString::new(body).map_err(|e| Fail(GbStatus::Other, e.to_string()))?;
    put(out, c.into_raw())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn chunk_config(min_words: usize, max_words: usize) -> ChunkConfig {
    let d = ChunkConfig::default();
    ChunkConfig {
        min_words: if min_words == 0 { d.min_words } else { min_words },
        max_words: if max_words == 0 { d.max_words } else { max_words },
    }
}

/// Parse guideline marker text and chunk it. Zero word limits select the
/// defaults.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_parse(
    text: *const c_char,
    min_words: usize,
    max_words: usize,
    out: *mut *mut GbCorpus,
) -> GbStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let chunks = chunk_document(&parse_marker_text(text)?, chunk_config(min_words, max_words))?;
        put(out, Box::into_raw(Box::new(GbCorpus { chunks })))
    })
}

/// Load a JSONL chunk store written by `guidebench ingest`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_load(path: *const c_char, out: *mut *mut GbCorpus) -> GbStatus {
    guard(|| {
        let chunks = read_chunks(Path::new(str_arg(path, "path")?))?;
        put(out, Box::into_raw(Box::new(GbCorpus { chunks })))
    })
}

/// Number of chunks, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_len(corpus: *const GbCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.chunks.len())
}

/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_chunks_json(corpus: *const GbCorpus, out: *mut *mut c_char) -> GbStatus {
    guard(|| put_json(out, &ref_arg(corpus, "corpus")?.chunks))
}

/// Word share per top-level part as a JSON object.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_part_distribution_json(corpus: *const GbCorpus, out: *mut *mut c_char) -> GbStatus {
    guard(|| put_json(out, &part_distribution(&ref_arg(corpus, "corpus")?.chunks)?))
}

/// Added, removed and modified chunks between two versions.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_diff_json(
    old: *const GbCorpus,
    new: *const GbCorpus,
    out: *mut *mut c_char,
) -> GbStatus {
    guard(|| {
        let changes = diff_versions(&ref_arg(old, "old")?.chunks, &ref_arg(new, "new")?.chunks);
        put_json(out, &changes)
    })
}

/// # Safety
/// `corpus` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gb_corpus_free(corpus: *mut GbCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Build BM25 and vector indexes over a corpus. The corpus may be freed
/// afterwards.
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_index_build(corpus: *const GbCorpus, out: *mut *mut GbIndex) -> GbStatus {
    guard(|| {
        let index = build_indexes(&ref_arg(corpus, "corpus")?.chunks, &HashEmbedder)?;
        put(out, Box::into_raw(Box::new(GbIndex { index })))
    })
}

/// Top `k` chunks by reciprocal rank fusion, as a JSON array.
///
/// # Safety
/// `index` must be a live handle, `query` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gb_index_search_json(
    index: *const GbIndex,
    query: *const c_char,
    k: usize,
    out: *mut *mut c_char,
) -> GbStatus {
    guard(|| {
        let idx = ref_arg(index, "index")?;
        put_json(out, &search(str_arg(query, "query")?, k, &idx.index, &HashEmbedder)?)
    })
}

/// # Safety
/// `index` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gb_index_free(index: *mut GbIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Score one transcript against its scenario with the bundled vocabulary,
/// hash embedder and default metric weights. Both inputs and the output
/// are JSON.
///
/// # Safety
/// Both inputs must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_score_transcript_json(
    scenario_json: *const c_char,
    transcript_json: *const c_char,
    out: *mut *mut c_char,
) -> GbStatus {
    guard(|| {
        let scenario: Scenario =
            serde_json::from_str(str_arg(scenario_json, "scenario_json")?).map_err(|e| Error::json("scenario", e))?;
        let transcript: Transcript = serde_json::from_str(str_arg(transcript_json, "transcript_json")?)
            .map_err(|e| Error::json("transcript", e))?;
        let vocab = Vocabulary::bundled();
        let result = score_transcript(&scenario, &transcript, &HashEmbedder, &vocab, &MetricConfig::default())?;
        put_json(out, &result)
    })
}

/// Percentile bootstrap interval of the mean of `n` samples.
///
/// # Safety
/// `samples` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_bootstrap_ci(
    samples: *const f64,
    n: usize,
    resamples: usize,
    level: f64,
    seed: u64,
    out: *mut GbInterval,
) -> GbStatus {
    guard(|| {
        let xs: &[f64] = match (samples.is_null(), n) {
            (_, 0) => &[],
            (true, _) => return Err(null("samples")),
            (false, n) => std::slice::from_raw_parts(samples, n),
        };
        let s = bootstrap_ci(xs, resamples, level, seed)?;
        put(
            out,
            GbInterval {
                mean: s.mean,
                ci_low: s.ci_low,
                ci_high: s.ci_high,
            },
        )
    })
}
