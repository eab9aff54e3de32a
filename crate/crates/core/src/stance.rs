//! Comment scoring and the top-k split into supporting and opposing sets.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tracing::warn;

use crate::agents::Agents;
use crate::gateway::{GatewayError, Message};
use crate::model::{AgentRole, Claim, Comment, ScoredComment, StanceSets};
use crate::opinion::TemplateId;

pub const UNPARSEABLE: &str = "unparseable";
pub const FORMAT_REMINDER: &str =
    "Output only the JSON object {\"Reason\": \"...\", \"Score\": \"...\"} with a score between -1.0 and 1.0.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StanceConfig {
    /// Comments kept per side.
    pub k: usize,
    pub score_parse_retries: u32,
    pub template: TemplateId,
}

impl Default for StanceConfig {
    fn default() -> Self {
        Self {
            k: 20,
            score_parse_retries: 2,
            template: TemplateId::StanceScore,
        }
    }
}

impl StanceConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k == 0 {
            return Err("stance k must be at least 1".into());
        }
        Ok(())
    }
}

/// Finds the first JSON object in `reply` and reads its `Score` (number or
/// numeric string) and optional `Reason`. The score is not clamped here.
pub fn parse_score_reply(reply: &str) -> Option<(f64, String)> {
    for (start, _) in reply.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&reply[start..]).into_iter::<Value>();
        let Some(Ok(Value::Object(obj))) = stream.next() else {
            continue;
        };
        let score = match obj.get("Score")? {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.trim().parse::<f64>().ok(),
            _ => None,
        }
        .filter(|s| s.is_finite())?;
        let reason = match obj.get("Reason") {
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
            None => String::new(),
        };
        return Some((score, reason));
    }
    None
}

/// Scores one comment's support for the claim. Replies that never parse,
/// even after `score_parse_retries` reminders, score 0.0.
pub async fn score_comment(
    agents: &Agents,
    claim: &Claim,
    comment: &Comment,
    cfg: &StanceConfig,
) -> Result<ScoredComment, GatewayError> {
    let prompt = agents
        .prompts()
        .get(agents.locale_for(claim), cfg.template)
        .render(&[("Claim", &claim.text), ("Comment", &comment.text)])
        .map_err(|e| GatewayError::InvalidRequest(e.to_string()))?;
    let mut messages = vec![Message::user(prompt)];
    for attempt in 0..=cfg.score_parse_retries {
        let reply = agents.ask(AgentRole::Scorer, &messages).await?;
        if let Some((score, reason)) = parse_score_reply(&reply) {
            return Ok(ScoredComment::new(comment.clone(), score, reason));
        }
        if attempt < cfg.score_parse_retries {
            messages.push(Message::assistant(reply));
            messages.push(Message::user(FORMAT_REMINDER));
        }
    }
    warn!(claim = %claim.id, "score reply never parsed; neutralizing comment");
    Ok(ScoredComment::new(comment.clone(), 0.0, UNPARSEABLE))
}

/// Scores every comment of a claim, keeping input order. At most
/// `concurrency` requests are in flight.
pub async fn score_all(
    agents: &Agents,
    claim: &Claim,
    comments: &[Comment],
    cfg: &StanceConfig,
    concurrency: usize,
) -> Result<Vec<ScoredComment>, GatewayError> {
    use futures::{StreamExt, TryStreamExt};
    let pending: Vec<_> = comments.iter().map(|c| score_comment(agents, claim, c, cfg)).collect();
    futures::stream::iter(pending)
        .buffered(concurrency.max(1))
        .try_collect()
        .await
}

/// Ranks by score (strongest first, per `stronger`), then earlier delay, then
/// input position.
fn rank(
    scored: &[ScoredComment],
    keep: impl Fn(f64) -> bool,
    stronger: impl Fn(f64, f64) -> Ordering,
) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scored.len()).filter(|&i| keep(scored[i].score)).collect();
    idx.sort_by(|&a, &b| {
        stronger(scored[a].score, scored[b].score)
            .then(scored[a].comment.delay.total_cmp(&scored[b].comment.delay))
            .then(a.cmp(&b))
    });
    idx
}

/// Keeps up to `k` most positive comments as P and up to `k` most negative as
/// N. Zero scores go to neither side.
pub fn separate_stances(scored: &[ScoredComment], k: usize) -> StanceSets {
    let pick = |idx: Vec<usize>| idx.into_iter().take(k).map(|i| scored[i].clone()).collect();
    StanceSets {
        support: pick(rank(scored, |s| s > 0.0, |a, b| b.total_cmp(&a))),
        oppose: pick(rank(scored, |s| s < 0.0, |a, b| a.total_cmp(&b))),
        k,
    }
}
