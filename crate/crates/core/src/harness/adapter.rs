use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Harness,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
}

impl Message {
    pub fn harness(text: impl Into<String>) -> Self {
        Self {
            role: Role::Harness,
            text: text.into(),
        }
    }

    pub fn model(text: impl Into<String>) -> Self {
        Self {
            role: Role::Model,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub session_id: String,
    pub preamble: String,
    pub messages: Vec<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_hint: Option<Value>,
    /// Sampling temperature override forwarded to the backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl ModelRequest {
    /// One-shot request with a single harness message.
    pub fn single(session_id: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            preamble: String::new(),
            messages: vec![Message::harness(prompt)],
            schema_hint: None,
            temperature: None,
        }
    }

    /// Number of model turns already present in the conversation.
    pub fn model_turns(&self) -> usize {
        self.messages.iter().filter(|m| m.role == Role::Model).count()
    }

    pub fn last_harness_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::Harness)
            .map_or("", |m| m.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structured: Option<Value>,
    #[serde(default)]
    pub latency_ms: u64,
}

impl ModelResponse {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            structured: None,
            latency_ms: 0,
        }
    }
}

/// Vendor-neutral text-generation backend. Both item generation and the
/// evaluation sessions talk to models through this contract.
pub trait ModelAdapter: Send + Sync {
    fn id(&self) -> &str;

    fn respond(&self, request: &ModelRequest) -> Result<ModelResponse>;
}

/// Pull a JSON object out of a reply, tolerating ```json fences and prose
/// around the object.
pub fn extract_json(text: &str) -> Option<Value> {
    let trimmed = text.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        return v.is_object().then_some(v);
    }
    let start = trimmed.find('{')?;
    let end = trimmed.rfind('}')?;
    if end <= start {
        return None;
    }
    serde_json::from_str::<Value>(&trimmed[start..=end])
        .ok()
        .filter(Value::is_object)
}
