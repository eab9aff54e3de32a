//! Shared handle every LLM-backed stage uses to issue requests.

use std::sync::Arc;

use crate::gateway::{BackendConfig, Gateway, GatewayError, Message};
use crate::model::{AgentRole, Claim, Locale};
use crate::opinion::PromptLibrary;

#[derive(Clone)]
pub struct Agents {
    gateway: Arc<Gateway>,
    backend: BackendConfig,
    prompts: Arc<PromptLibrary>,
    locale_override: Option<Locale>,
}

impl Agents {
    pub fn new(gateway: Arc<Gateway>, backend: BackendConfig) -> Self {
        Self {
            gateway,
            backend,
            prompts: Arc::new(PromptLibrary::builtin()),
            locale_override: None,
        }
    }

    pub fn with_prompts(mut self, prompts: PromptLibrary) -> Self {
        self.prompts = Arc::new(prompts);
        self
    }

    /// Forces one prompt locale regardless of each claim's platform.
    pub fn with_locale(mut self, locale: Option<Locale>) -> Self {
        self.locale_override = locale;
        self
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn backend(&self) -> &BackendConfig {
        &self.backend
    }

    pub fn prompts(&self) -> &PromptLibrary {
        &self.prompts
    }

    pub fn locale_for(&self, claim: &Claim) -> Locale {
        self.locale_override.unwrap_or(claim.platform_locale)
    }

    pub async fn ask(&self, role: AgentRole, messages: &[Message]) -> Result<String, GatewayError> {
        let req = self.backend.request(role, messages.to_vec());
        Ok(self.gateway.generate(&req).await?.text)
    }
}
