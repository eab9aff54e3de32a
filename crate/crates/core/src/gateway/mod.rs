//! Uniform access to text-generation backends.
//!
//! A [`Gateway`] wraps one [`Backend`] with retries, an optional rate limiter
//! and a response cache. Every LLM call in the pipeline goes through
//! [`Gateway::generate`].

mod cache;
mod http;
mod limiter;
mod scripted;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use crate::model::AgentRole;

pub use cache::{CacheRecord, ResponseCache};
pub use http::{HttpBackend, WireFormat};
pub use limiter::RateLimiter;
pub use scripted::{Matcher, MatchScope, Rule, ScriptedBackend, ScriptedError, FALLBACK_MARKER};

pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_MAX_TOKENS: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    #[serde(rename = "role")]
    pub speaker: Speaker,
    #[serde(rename = "content")]
    pub text: String,
}

impl Message {
    pub fn system(text: impl Into<String>) -> Self {
        Self {
            speaker: Speaker::System,
            text: text.into(),
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self {
            speaker: Speaker::User,
            text: text.into(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Self {
            speaker: Speaker::Assistant,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub role: AgentRole,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub model_id: String,
    pub max_tokens: u32,
}

impl GenerationRequest {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let invalid = |m: &str| Err(GatewayError::InvalidRequest(m.to_string()));
        match self.messages.first() {
            None => return invalid("message list is empty"),
            Some(m) if m.speaker == Speaker::Assistant => {
                return invalid("first message must come from system or user")
            }
            _ => {}
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return invalid("temperature must lie in [0, 2]");
        }
        if self.max_tokens == 0 {
            return invalid("max_tokens must be positive");
        }
        Ok(())
    }

    /// Message texts joined by newlines; what scripted matchers look at.
    pub fn concatenated_text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    pub backend_id: String,
    pub cached: bool,
    pub latency_ms: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("backend refused or returned empty output: {0}")]
    BackendRefusal(String),
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cache error: {0}")]
    Cache(String),
}

/// Failure of a single backend attempt, classified for the retry loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("{0}")]
    Retryable(String),
    #[error("{0}")]
    Fatal(String),
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("{0}")]
    Refusal(String),
}

/// One text-generation backend. Implementations perform a single attempt;
/// retries and caching belong to [`Gateway`].
#[async_trait]
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    async fn complete(&self, req: &GenerationRequest) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub backoff_base: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): `base * 2^(retry-1)`.
    pub fn delay(&self, retry: u32) -> Duration {
        self.backoff_base
            .saturating_mul(1u32 << (retry.saturating_sub(1)).min(16))
    }
}

/// Settings for talking to a live backend, plus per-role model routing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub endpoint_url: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_token_env_var: String,
    pub model_id: String,
    pub role_models: BTreeMap<AgentRole, String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub requests_per_minute: Option<u32>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub wire: WireFormat,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1/chat/completions".to_string(),
            auth_token_env_var: "OPENAI_API_KEY".to_string(),
            model_id: "gpt-3.5-turbo".to_string(),
            role_models: BTreeMap::new(),
            timeout_ms: 60_000,
            max_retries: 3,
            retry_backoff_ms: 500,
            requests_per_minute: None,
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            wire: WireFormat::default(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.timeout_ms == 0 {
            return Err(GatewayError::Config("timeout must be positive".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::Config("temperature must lie in [0, 2]".into()));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }

    pub fn model_for(&self, role: AgentRole) -> &str {
        self.role_models
            .get(&role)
            .map(String::as_str)
            .unwrap_or(&self.model_id)
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            backoff_base: Duration::from_millis(self.retry_backoff_ms),
        }
    }

    pub fn request(&self, role: AgentRole, messages: Vec<Message>) -> GenerationRequest {
        GenerationRequest {
            role,
            messages,
            temperature: self.temperature,
            model_id: self.model_for(role).to_string(),
            max_tokens: self.max_tokens,
        }
    }
}

pub struct Gateway {
    backend: Arc<dyn Backend>,
    retry: RetryPolicy,
    cache: ResponseCache,
    limiter: Option<RateLimiter>,
}

impl Gateway {
    /// Gateway with an in-memory cache and the default retry policy.
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            retry: RetryPolicy::default(),
            cache: ResponseCache::in_memory(),
            limiter: None,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_rate_limit(mut self, limiter: RateLimiter) -> Self {
        self.limiter = Some(limiter);
        self
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub async fn generate(&self, req: &GenerationRequest) -> Result<GenerationResult, GatewayError> {
        req.validate()?;
        let start = Instant::now();
        let key = cache::key_digest(req);
        if let Some(text) = self.cache.get(&key) {
            debug!(role = %req.role, "cache hit");
            return Ok(GenerationResult {
                text,
                backend_id: self.backend.id().to_string(),
                cached: true,
                latency_ms: start.elapsed().as_millis() as u64,
            });
        }

        let text = self.call_with_retries(req).await?;
        let text = self.cache.insert(key, req, text)?;
        Ok(GenerationResult {
            text,
            backend_id: self.backend.id().to_string(),
            cached: false,
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }

    /// One-token request that bypasses the cache; used to fail fast on bad
    /// endpoints or credentials before a batch starts.
    pub async fn ping(&self, model_id: &str) -> Result<(), GatewayError> {
        let req = GenerationRequest {
            role: AgentRole::Judge,
            messages: vec![Message::user("ping")],
            temperature: DEFAULT_TEMPERATURE,
            model_id: model_id.to_string(),
            max_tokens: 1,
        };
        match self.call_with_retries(&req).await {
            Ok(_) | Err(GatewayError::BackendRefusal(_)) => Ok(()),
            Err(e) => Err(e),
        }
    }

    async fn call_with_retries(&self, req: &GenerationRequest) -> Result<String, GatewayError> {
        let mut attempts = 0u32;
        loop {
            if let Some(limiter) = &self.limiter {
                limiter.acquire().await;
            }
            attempts += 1;
            match self.backend.complete(req).await {
                Ok(text) if text.trim().is_empty() => {
                    return Err(GatewayError::BackendRefusal("empty output".into()))
                }
                Ok(text) => return Ok(text),
                Err(BackendError::Auth(status)) => return Err(GatewayError::Auth { status }),
                Err(BackendError::Refusal(m)) => return Err(GatewayError::BackendRefusal(m)),
                Err(BackendError::Fatal(message)) => {
                    return Err(GatewayError::Transport { attempts, message })
                }
                Err(BackendError::Retryable(message)) => {
                    if attempts > self.retry.max_retries {
                        return Err(GatewayError::Transport { attempts, message });
                    }
                    let delay = self.retry.delay(attempts);
                    warn!(attempt = attempts, ?delay, %message, "retrying backend call");
                    tokio::time::sleep(delay).await;
                }
            }
        }
    }
}
