//! Crate-wide error type and the CLI exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::StructureDiagnostic;
use crate::generation::grammar::ParseDiagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("malformed structure:\n{}", render_structure(.0))]
    Structure(Vec<StructureDiagnostic>),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no well-formed MCQ block ({} diagnostics)", .0.len())]
    McqParse(Vec<ParseDiagnostic>),

    #[error("translation parse error: {0}")]
    TranslationParse(String),

    #[error("forge parse error: {0}")]
    ForgeParse(String),

    #[error("data gap: {0}")]
    DataGap(String),

    #[error("backend error: {message}{}", if *.retryable { " (retryable)" } else { "" })]
    Backend { message: String, retryable: bool },

    #[error("embedding failed for chunk {chunk_id}: {source}")]
    IndexBuild {
        chunk_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("all {0} generation units failed")]
    BatchFailed(usize),

    #[error("service error: {0}")]
    Service(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

fn render_structure(diags: &[StructureDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  line {}: {}", d.line, d.message))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub fn backend(message: impl Into<String>, retryable: bool) -> Self {
        Error::Backend {
            message: message.into(),
            retryable,
        }
    }

    /// Stable process exit code: 1 data, 2 I/O, 3 backend, 4 service.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Backend { .. } | Error::BatchFailed(_) => 3,
            Error::IndexBuild { source, .. } => source.exit_code(),
            Error::Service(_) => 4,
            _ => 1,
        }
    }
}
