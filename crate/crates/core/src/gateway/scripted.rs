//! Rule-driven stand-in for an LLM endpoint.
//!
//! A rule fires when every one of its matchers holds and, if it names roles,
//! the request comes from one of them. The first firing rule's response is
//! returned verbatim. Rules files are JSON arrays of [`Rule`]:
//!
//! ```json
//! [
//!   {"roles": ["Scorer"], "when": [{"contains": "confirmed by officials"}],
//!    "response": "{\"Reason\": \"official\", \"Score\": \"0.9\"}"},
//!   {"when": [{"regex": "(?i)vaccine", "scope": "last"}], "response": "Fake"}
//! ]
//! ```

use std::path::Path;

use async_trait::async_trait;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use super::{Backend, BackendError, GenerationRequest};
use crate::model::AgentRole;

/// Prefix of the reply produced when no rule matches.
pub const FALLBACK_MARKER: &str = "[no scripted rule matched]";

#[derive(Debug, Error)]
pub enum ScriptedError {
    #[error("scripted backend needs at least one rule")]
    NoRules,
    #[error("rule {index}: bad regex: {source}")]
    Regex {
        index: usize,
        #[source]
        source: regex::Error,
    },
    #[error("reading rules file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing rules file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchScope {
    /// All message texts joined by newlines.
    #[default]
    All,
    /// Only the final message of the request.
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Contains(String),
    Regex(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matcher {
    #[serde(flatten)]
    pub pattern: Pattern,
    #[serde(default)]
    pub scope: MatchScope,
}

impl Matcher {
    pub fn contains(s: impl Into<String>) -> Self {
        Self {
            pattern: Pattern::Contains(s.into()),
            scope: MatchScope::All,
        }
    }

    pub fn regex(s: impl Into<String>) -> Self {
        Self {
            pattern: Pattern::Regex(s.into()),
            scope: MatchScope::All,
        }
    }

    pub fn in_last_message(mut self) -> Self {
        self.scope = MatchScope::Last;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roles: Vec<AgentRole>,
    #[serde(default)]
    pub when: Vec<Matcher>,
    pub response: String,
}

impl Rule {
    /// Rule firing on a substring of the concatenated message text.
    pub fn contains(pattern: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            roles: Vec::new(),
            when: vec![Matcher::contains(pattern)],
            response: response.into(),
        }
    }

    /// Rule that always fires (for the listed roles, if any).
    pub fn always(response: impl Into<String>) -> Self {
        Self {
            roles: Vec::new(),
            when: Vec::new(),
            response: response.into(),
        }
    }

    pub fn for_role(mut self, role: AgentRole) -> Self {
        self.roles.push(role);
        self
    }

    pub fn and(mut self, m: Matcher) -> Self {
        self.when.push(m);
        self
    }
}

enum Compiled {
    Contains(String),
    Regex(Regex),
}

struct CompiledRule {
    roles: Vec<AgentRole>,
    when: Vec<(Compiled, MatchScope)>,
    response: String,
}

/// Pure function of (rules, request): no counters, no randomness.
pub struct ScriptedBackend {
    rules: Vec<CompiledRule>,
}

impl ScriptedBackend {
    pub fn new(rules: Vec<Rule>) -> Result<Self, ScriptedError> {
        if rules.is_empty() {
            return Err(ScriptedError::NoRules);
        }
        let rules = rules
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                let when = r
                    .when
                    .into_iter()
                    .map(|m| {
                        let c = match m.pattern {
                            Pattern::Contains(s) => Compiled::Contains(s),
                            Pattern::Regex(s) => Compiled::Regex(
                                Regex::new(&s).map_err(|source| ScriptedError::Regex { index, source })?,
                            ),
                        };
                        Ok((c, m.scope))
                    })
                    .collect::<Result<Vec<_>, ScriptedError>>()?;
                Ok(CompiledRule {
                    roles: r.roles,
                    when,
                    response: r.response,
                })
            })
            .collect::<Result<Vec<_>, ScriptedError>>()?;
        Ok(Self { rules })
    }

    pub fn from_json(json: &str) -> Result<Self, ScriptedError> {
        Self::new(serde_json::from_str(json)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ScriptedError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Reply for `req`; the fallback reply when nothing matches.
    pub fn respond(&self, req: &GenerationRequest) -> String {
        let all = req.concatenated_text();
        let last = req.messages.last().map(|m| m.text.as_str()).unwrap_or("");
        for rule in &self.rules {
            if !rule.roles.is_empty() && !rule.roles.contains(&req.role) {
                continue;
            }
            let hit = rule.when.iter().all(|(c, scope)| {
                let hay = match scope {
                    MatchScope::All => all.as_str(),
                    MatchScope::Last => last,
                };
                match c {
                    Compiled::Contains(s) => hay.contains(s.as_str()),
                    Compiled::Regex(re) => re.is_match(hay),
                }
            });
            if hit {
                return rule.response.clone();
            }
        }
        warn!(role = %req.role, "no scripted rule matched; answering with fallback");
        format!("{FALLBACK_MARKER} Real")
    }
}

#[async_trait]
impl Backend for ScriptedBackend {
    fn id(&self) -> &str {
        "scripted"
    }

    async fn complete(&self, req: &GenerationRequest) -> Result<String, BackendError> {
        Ok(self.respond(req))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{BackendConfig, Gateway, Message};
    use std::sync::Arc;

    fn req(role: AgentRole, msgs: &[&str]) -> GenerationRequest {
        BackendConfig::default().request(role, msgs.iter().map(|m| Message::user(*m)).collect())
    }

    #[test]
    fn first_matching_rule_wins() {
        let b = ScriptedBackend::new(vec![
            Rule::contains("support that the source post", r#"{"Reason":"ok","Score":"0.8"}"#),
            Rule::contains("source post", "second"),
        ])
        .unwrap();
        let r = req(AgentRole::Scorer, &["Does the comment support that the source post is real?"]);
        assert_eq!(b.respond(&r), r#"{"Reason":"ok","Score":"0.8"}"#);
    }

    #[test]
    fn fallback_is_real_with_marker() {
        let b = ScriptedBackend::new(vec![Rule::contains("zzz", "x")]).unwrap();
        let out = b.respond(&req(AgentRole::Judge, &["hello"]));
        assert!(out.starts_with(FALLBACK_MARKER));
        assert!(out.ends_with("Real"));
    }

    #[test]
    fn empty_rules_rejected() {
        assert!(matches!(ScriptedBackend::new(vec![]), Err(ScriptedError::NoRules)));
    }

    #[test]
    fn bad_regex_rejected() {
        let r = Rule::always("x").and(Matcher::regex("("));
        assert!(matches!(
            ScriptedBackend::new(vec![r]),
            Err(ScriptedError::Regex { index: 0, .. })
        ));
    }

    #[test]
    fn role_and_scope_filters() {
        let b = ScriptedBackend::new(vec![
            Rule::always("judge").for_role(AgentRole::Judge),
            Rule::always("last-has-fake").and(Matcher::contains("Fake").in_last_message()),
            Rule::always("other"),
        ])
        .unwrap();
        assert_eq!(b.respond(&req(AgentRole::Judge, &["a"])), "judge");
        assert_eq!(b.respond(&req(AgentRole::DebaterN, &["Fake", "b"])), "other");
        assert_eq!(b.respond(&req(AgentRole::DebaterN, &["b", "Fake"])), "last-has-fake");
    }

    #[test]
    fn rules_json_round_trip() {
        let json = r#"[
            {"roles": ["Scorer"], "when": [{"contains": "officials"}], "response": "a"},
            {"when": [{"regex": "(?i)vaccine", "scope": "last"}], "response": "Fake"},
            {"response": "Real"}
        ]"#;
        let rules: Vec<Rule> = serde_json::from_str(json).unwrap();
        assert_eq!(rules[0].roles, vec![AgentRole::Scorer]);
        assert_eq!(rules[1].when[0], Matcher::regex("(?i)vaccine").in_last_message());
        assert!(rules[2].when.is_empty());
        let again: Vec<Rule> =
            serde_json::from_str(&serde_json::to_string(&rules).unwrap()).unwrap();
        assert_eq!(again, rules);
        let b = ScriptedBackend::from_json(json).unwrap();
        assert_eq!(b.respond(&req(AgentRole::Judge, &["VACCINE"])), "Fake");
    }

    #[tokio::test]
    async fn scripted_reply_through_gateway_is_verbatim_then_cached() {
        let reply = r#"{"Reason":"ok","Score":"0.8"}"#;
        let g = Gateway::new(Arc::new(
            ScriptedBackend::new(vec![Rule::contains("Score", reply)]).unwrap(),
        ));
        let r = req(AgentRole::Scorer, &["give a Score"]);
        let first = g.generate(&r).await.unwrap();
        assert_eq!(first.text, reply);
        assert!(!first.cached);
        assert_eq!(first.backend_id, "scripted");
        let second = g.generate(&r).await.unwrap();
        assert!(second.cached);
        assert_eq!(second.text, reply);
    }
}
