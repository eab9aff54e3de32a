#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use stance_debate::agents::Agents;
use stance_debate::gateway::{Backend, BackendConfig, BackendError, Gateway, GenerationRequest, Rule, ScriptedBackend};
use stance_debate::model::{AgentRole, Claim, Comment, Label, Locale, Thread, Verdict};

/// Scripted backend that also records every request.
pub struct Counting {
    inner: ScriptedBackend,
    pub calls: Mutex<BTreeMap<AgentRole, usize>>,
    pub requests: Mutex<Vec<GenerationRequest>>,
}

impl Counting {
    pub fn new(rules: Vec<Rule>) -> Self {
        Self {
            inner: ScriptedBackend::new(rules).unwrap(),
            calls: Mutex::new(BTreeMap::new()),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Text of the last message of every request sent for `role`.
    pub fn prompts(&self, role: AgentRole) -> Vec<String> {
        self.requests
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.role == role)
            .filter_map(|r| r.messages.last().map(|m| m.text.clone()))
            .collect()
    }

    pub fn count(&self, role: AgentRole) -> usize {
        self.calls.lock().unwrap().get(&role).copied().unwrap_or(0)
    }
}

#[async_trait]
impl Backend for Counting {
    fn id(&self) -> &str {
        "counting"
    }

    async fn complete(&self, req: &GenerationRequest) -> Result<String, BackendError> {
        *self.calls.lock().unwrap().entry(req.role).or_default() += 1;
        self.requests.lock().unwrap().push(req.clone());
        self.inner.complete(req).await
    }
}

/// Backend that fails every call; anything served must come from the cache.
pub struct Unreachable;

#[async_trait]
impl Backend for Unreachable {
    fn id(&self) -> &str {
        "unreachable"
    }

    async fn complete(&self, _req: &GenerationRequest) -> Result<String, BackendError> {
        Err(BackendError::Fatal("backend is offline".into()))
    }
}

pub fn agents_with(backend: Arc<dyn Backend>) -> Agents {
    Agents::new(Arc::new(Gateway::new(backend)), BackendConfig::default())
}

pub fn agents(rules: Vec<Rule>) -> Agents {
    agents_with(Arc::new(ScriptedBackend::new(rules).unwrap()))
}

pub fn word(v: Verdict) -> &'static str {
    match v {
        Verdict::Fake => "Fake",
        Verdict::Real => "Real",
    }
}

/// Scorer and subjectivity rules: comments mentioning "agree" score 0.8,
/// "disagree" -0.8, anything else 0.0; every claim is non-subjective.
pub fn base_rules() -> Vec<Rule> {
    vec![
        Rule::contains("Comment: disagree", r#"{"Reason": "opposes", "Score": "-0.8"}"#).for_role(AgentRole::Scorer),
        Rule::contains("Comment: agree", r#"{"Reason": "supports", "Score": "0.8"}"#).for_role(AgentRole::Scorer),
        Rule::always(r#"{"Reason": "neutral", "Score": "0.0"}"#).for_role(AgentRole::Scorer),
        Rule::always("No").for_role(AgentRole::SubjectivityClassifier),
    ]
}

/// Debater rules answering `p[j]` / `n[j]` at round j. Each reply carries a
/// role-and-round marker that the next round's rule keys on; rules for later
/// rounds come first so the newest marker wins.
pub fn round_rules(p: &[Verdict], n: &[Verdict], judge: Verdict) -> Vec<Rule> {
    let mut rules = Vec::new();
    for (tag, role, verdicts) in [("P", AgentRole::DebaterP, p), ("N", AgentRole::DebaterN, n)] {
        for j in (1..verdicts.len()).rev() {
            rules.push(
                Rule::contains(
                    format!("<{tag}{}>", j - 1),
                    format!("<{tag}{j}> after weighing it again, {}", word(verdicts[j])),
                )
                .for_role(role),
            );
        }
        rules.push(Rule::always(format!("<{tag}0> first impression: {}", word(verdicts[0]))).for_role(role));
    }
    rules.push(Rule::always(format!("Having read both sides: {}", word(judge))).for_role(AgentRole::Judge));
    rules.extend(base_rules());
    rules
}

pub fn claim(id: &str, label: Option<Label>) -> Claim {
    Claim::new(id, format!("Claim {id}: the city water supply was poisoned."), label, Locale::En).unwrap()
}

pub fn thread(id: &str, n_comments: usize) -> Thread {
    let comments = (0..n_comments)
        .map(|i| {
            let text = match i % 3 {
                0 => format!("agree #{i}"),
                1 => format!("disagree #{i}"),
                _ => format!("whatever #{i}"),
            };
            Comment::new(text, (i * 7 % 11) as f64).unwrap()
        })
        .collect();
    Thread::new(claim(id, Some(Label::Rumor)), comments)
}
