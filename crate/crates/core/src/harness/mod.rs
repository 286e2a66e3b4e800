//! Model-facing sessions that produce transcripts for scoring.

mod adapter;
mod answer;
mod clock;
mod http;
mod matching;
mod mock;
mod session;
mod transcript;

pub use adapter::{extract_json, Message, ModelAdapter, ModelRequest, ModelResponse, Role};
pub use answer::{final_marker_end, parse_final_answer, parse_geo_answer, split_diagnoses, FINAL_MARKER};
pub use clock::{Clock, LogicalClock, SystemClock};
pub use http::{HttpAdapter, HttpAdapterConfig};
pub use matching::{embedding_text, match_query_to_nodes, truncate_tokens, NodeMatcher, DEFAULT_MATCH_THRESHOLD};
pub use mock::{MockScript, ScriptedMock, ScriptedReply, TRANSPORT_ERROR_REPLY};
pub use session::{
    persona_preamble, run_bias_session, run_decision_session, run_geo_query, run_needle_session, run_reverse_session,
    SessionContext, BIAS_STAGE1_QUESTION, BIAS_STAGE2_QUESTION, GEO_QUESTION, MAX_SCRIPT, MIN_SCRIPT, NO_INFORMATION,
    STANDING_QUESTION,
};
pub use transcript::{
    read_transcript, transcript_from_jsonl, transcript_to_jsonl, write_transcript, ExtractionMethod, FinalAnswer,
    GeoAnswer, ScenarioRef, Termination, Transcript, Turn,
};
