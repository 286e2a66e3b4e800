use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::adapter::{extract_json, ModelAdapter, ModelRequest, ModelResponse};
use crate::error::{Error, Result};

/// Reply text that makes the mock simulate a transport failure.
pub const TRANSPORT_ERROR_REPLY: &str = "!transport-error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedReply {
    Text(String),
    Structured { text: String, structured: Value },
}

impl ScriptedReply {
    fn text(&self) -> &str {
        match self {
            ScriptedReply::Text(t) => t,
            ScriptedReply::Structured { text, .. } => text,
        }
    }
}

/// Script file: per-session reply lists indexed by model turn. A session
/// past the end of its list keeps repeating the last reply.
///
/// ```json
/// {"sessions": {"decision:v1": ["Breathing rate?", "FINAL: pneumonia"]},
///  "default": ["FINAL: unsure"]}
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub sessions: BTreeMap<String, Vec<ScriptedReply>>,
    #[serde(default)]
    pub default: Vec<ScriptedReply>,
}

/// Deterministic model stand-in driven by a [`MockScript`].
#[derive(Debug, Clone)]
pub struct ScriptedMock {
    script: MockScript,
}

impl ScriptedMock {
    pub fn new(script: MockScript) -> Self {
        Self { script }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let script =
            serde_json::from_str(&body).map_err(|e| Error::json(path.display().to_string(), e))?;
        Ok(Self::new(script))
    }

    /// Shorthand for a single session of plain-text replies.
    pub fn single(session_id: &str, replies: &[&str]) -> Self {
        let mut script = MockScript::default();
        script.sessions.insert(
            session_id.to_string(),
            replies.iter().map(|r| ScriptedReply::Text(r.to_string())).collect(),
        );
        Self::new(script)
    }
}

impl ModelAdapter for ScriptedMock {
    fn id(&self) -> &str {
        "scripted-mock"
    }

    fn respond(&self, req: &ModelRequest) -> Result<ModelResponse> {
        let replies = self
            .script
            .sessions
            .get(&req.session_id)
            .filter(|r| !r.is_empty())
            .or_else(|| (!self.script.default.is_empty()).then_some(&self.script.default))
            .ok_or_else(|| {
                Error::backend(format!("no scripted replies for session {}", req.session_id), false)
            })?;
        let turn = req.model_turns();
        let reply = replies.get(turn).unwrap_or_else(|| &replies[replies.len() - 1]);
        if reply.text() == TRANSPORT_ERROR_REPLY {
            return Err(Error::backend("scripted transport failure", true));
        }
        let structured = match reply {
            ScriptedReply::Structured { structured, .. } => Some(structured.clone()),
            ScriptedReply::Text(t) => req.schema_hint.as_ref().and_then(|_| extract_json(t)),
        };
        Ok(ModelResponse {
            text: reply.text().to_string(),
            structured,
            latency_ms: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::adapter::Message;

    #[test]
    fn replies_follow_turn_index_and_repeat_last() {
        let mock = ScriptedMock::single("s", &["one", "two"]);
        let mut req = ModelRequest::single("s", "hi");
        assert_eq!(mock.respond(&req).unwrap().text, "one");
        req.messages.push(Message::model("one"));
        req.messages.push(Message::harness("next"));
        assert_eq!(mock.respond(&req).unwrap().text, "two");
        req.messages.push(Message::model("two"));
        assert_eq!(mock.respond(&req).unwrap().text, "two");
    }

    #[test]
    fn unknown_session_without_default_fails() {
        let mock = ScriptedMock::single("s", &["one"]);
        assert!(mock.respond(&ModelRequest::single("other", "x")).is_err());
    }

    #[test]
    fn script_file_parses_both_reply_shapes() {
        let script: MockScript = serde_json::from_str(
            r#"{"sessions": {"geo:a": [{"text": "t", "structured": {"antigens": ["OPV"]}}]},
                "default": ["plain"]}"#,
        )
        .unwrap();
        let mock = ScriptedMock::new(script);
        let r = mock.respond(&ModelRequest::single("geo:a", "q")).unwrap();
        assert_eq!(r.structured.unwrap()["antigens"][0], "OPV");
        assert_eq!(mock.respond(&ModelRequest::single("zzz", "q")).unwrap().text, "plain");
    }
}
