//! Guideline-grounded benchmark forge and LLM evaluation harness.
//!
//! The pipeline: ingest guideline marker text into chunks ([`corpus`]),
//! index them ([`retrieval`]), generate and audit MCQ items
//! ([`generation`]), run blinded expert review ([`review`]), build
//! metric-specific scenarios ([`scenario`]), run model sessions
//! ([`harness`]) and score them ([`metrics`]).

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod generation;
pub mod harness;
pub mod jsonl;
pub mod metrics;
pub mod retrieval;
pub mod review;
pub mod scenario;
pub mod text;
pub mod vocab;

pub use error::{Error, Result};
