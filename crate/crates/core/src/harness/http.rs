use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::adapter::{extract_json, ModelAdapter, ModelRequest, ModelResponse, Role};
use crate::error::{Error, Result};

/// Connection settings for a chat-completions style endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpAdapterConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
}

fn default_temperature() -> f64 {
    0.2
}

fn default_timeout() -> u64 {
    60
}

fn default_backoff() -> u64 {
    500
}

/// JSON-over-HTTP adapter speaking the widely implemented chat-completions
/// shape: `{model, temperature, messages: [{role, content}]}` in,
/// `{choices: [{message: {content}}]}` out.
pub struct HttpAdapter {
    id: String,
    cfg: HttpAdapterConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl HttpAdapter {
    pub fn new(cfg: HttpAdapterConfig) -> Result<Self> {
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::Config(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            id: format!("http:{}", cfg.model),
            cfg,
            api_key,
            client,
        })
    }

    fn body(&self, req: &ModelRequest) -> Value {
        let mut messages = Vec::new();
        if !req.preamble.is_empty() {
            messages.push(json!({"role": "system", "content": req.preamble}));
        }
        for m in &req.messages {
            let role = match m.role {
                Role::Harness => "user",
                Role::Model => "assistant",
            };
            messages.push(json!({"role": role, "content": m.text}));
        }
        let mut body = json!({
            "model": self.cfg.model,
            "temperature": req.temperature.unwrap_or(self.cfg.temperature),
            "messages": messages,
        });
        if req.schema_hint.is_some() {
            body["response_format"] = json!({"type": "json_object"});
        }
        body
    }

    fn attempt(&self, body: &Value) -> Result<String> {
        let mut call = self.client.post(&self.cfg.endpoint).json(body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let resp = call
            .send()
            .map_err(|e| Error::backend(format!("transport failure: {e}"), true))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::backend(
                format!("model endpoint returned {status}"),
                status.is_server_error() || status.as_u16() == 429,
            ));
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| Error::backend(format!("unexpected response body: {e}"), false))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| Error::backend("response had no choices", false))
    }
}

impl ModelAdapter for HttpAdapter {
    fn id(&self) -> &str {
        &self.id
    }

    fn respond(&self, req: &ModelRequest) -> Result<ModelResponse> {
        let body = self.body(req);
        let started = Instant::now();
        let text = match self.attempt(&body) {
            Err(Error::Backend {
                retryable: true, ..
            }) => {
                std::thread::sleep(Duration::from_millis(self.cfg.retry_backoff_ms));
                self.attempt(&body)?
            }
            other => other?,
        };
        let structured = req.schema_hint.as_ref().and_then(|_| extract_json(&text));
        Ok(ModelResponse {
            text,
            structured,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}
