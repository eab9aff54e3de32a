use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tracing::warn;

use super::{Backend, BackendConfig, BackendError, GatewayError, GenerationRequest, Speaker};

/// Field names of the chat-completion wire format. Defaults match the
/// OpenAI-compatible schema, which GLM and Qwen servers also accept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WireFormat {
    pub model_field: String,
    pub messages_field: String,
    pub role_field: String,
    pub content_field: String,
    pub temperature_field: String,
    pub max_tokens_field: String,
    /// JSON pointer to the generated text in the response body.
    pub response_pointer: String,
}

impl Default for WireFormat {
    fn default() -> Self {
        Self {
            model_field: "model".into(),
            messages_field: "messages".into(),
            role_field: "role".into(),
            content_field: "content".into(),
            temperature_field: "temperature".into(),
            max_tokens_field: "max_tokens".into(),
            response_pointer: "/choices/0/message/content".into(),
        }
    }
}

impl WireFormat {
    pub fn body(&self, req: &GenerationRequest) -> Value {
        let messages: Vec<Value> = req
            .messages
            .iter()
            .map(|m| {
                let role = match m.speaker {
                    Speaker::System => "system",
                    Speaker::User => "user",
                    Speaker::Assistant => "assistant",
                };
                let mut obj = Map::new();
                obj.insert(self.role_field.clone(), role.into());
                obj.insert(self.content_field.clone(), m.text.clone().into());
                Value::Object(obj)
            })
            .collect();
        let mut body = Map::new();
        body.insert(self.model_field.clone(), req.model_id.clone().into());
        body.insert(self.messages_field.clone(), messages.into());
        body.insert(self.temperature_field.clone(), req.temperature.into());
        body.insert(self.max_tokens_field.clone(), req.max_tokens.into());
        Value::Object(body)
    }

    pub fn extract_text(&self, response: &Value) -> Result<String, BackendError> {
        match response.pointer(&self.response_pointer) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Null) => Err(BackendError::Refusal("response content is null".into())),
            Some(other) => Err(BackendError::Fatal(format!(
                "expected a string at {}, found {other}",
                self.response_pointer
            ))),
            None => Err(BackendError::Fatal(format!(
                "response has no value at {}",
                self.response_pointer
            ))),
        }
    }
}

/// Chat-completion endpoint over HTTP POST with bearer auth.
pub struct HttpBackend {
    client: reqwest::Client,
    endpoint: String,
    token: Option<String>,
    wire: WireFormat,
}

impl HttpBackend {
    /// Reads the secret from the environment variable named in `cfg`.
    /// A missing variable means requests go out without an auth header.
    pub fn from_config(cfg: &BackendConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let token = if cfg.auth_token_env_var.is_empty() {
            None
        } else {
            match std::env::var(&cfg.auth_token_env_var) {
                Ok(t) if !t.is_empty() => Some(t),
                _ => {
                    warn!(var = %cfg.auth_token_env_var, "auth token variable unset; sending no auth header");
                    None
                }
            }
        };
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: cfg.endpoint_url.clone(),
            token,
            wire: cfg.wire.clone(),
        })
    }
}

#[async_trait]
impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.endpoint
    }

    async fn complete(&self, req: &GenerationRequest) -> Result<String, BackendError> {
        let mut call = self.client.post(&self.endpoint).json(&self.wire.body(req));
        if let Some(token) = &self.token {
            call = call.bearer_auth(token);
        }
        let resp = call
            .send()
            .await
            .map_err(|e| BackendError::Retryable(format!("request failed: {e}")))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(BackendError::Auth(status)),
            408 | 429 | 500..=599 => {
                return Err(BackendError::Retryable(format!("HTTP {status}")));
            }
            _ => {
                let body = resp.text().await.unwrap_or_default();
                return Err(BackendError::Fatal(format!("HTTP {status}: {body}")));
            }
        }
        let body: Value = resp
            .json()
            .await
            .map_err(|e| BackendError::Retryable(format!("reading response body: {e}")))?;
        self.wire.extract_text(&body)
    }
}
