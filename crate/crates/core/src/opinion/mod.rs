//! Claim subjectivity, initial opinions, and verdict parsing.

mod templates;
mod verdict;

use thiserror::Error;
use tracing::warn;

use crate::agents::Agents;
use crate::gateway::{GatewayError, Message};
use crate::model::{AgentRole, Claim, Comment, Opinion, Subjectivity};

pub use templates::{
    comment_block, PromptLibrary, PromptTemplate, TemplateError, TemplateId, KNOWN_PLACEHOLDERS,
    TEMPLATE_VERSION,
};
pub use verdict::{extract_verdict, parse_subjectivity, VERDICT_REMINDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpinionError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{role} gave no Fake/Real verdict at round {round}: {raw:?}")]
    VerdictUnparseable {
        role: AgentRole,
        round: usize,
        raw: String,
    },
    #[error("initial opinions come from debaters only, not {0}")]
    NotADebater(AgentRole),
}

pub async fn classify_subjectivity(agents: &Agents, claim: &Claim) -> Result<Subjectivity, GatewayError> {
    let prompt = agents
        .prompts()
        .get(agents.locale_for(claim), TemplateId::SubjectivityProbe)
        .render(&[("Claim", &claim.text)])
        .expect("subjectivity probe binds Claim only");
    let reply = agents
        .ask(AgentRole::SubjectivityClassifier, &[Message::user(prompt)])
        .await?;
    Ok(parse_subjectivity(&reply).unwrap_or_else(|| {
        warn!(claim = %claim.id, %reply, "ambiguous subjectivity reply; treating as non-subjective");
        Subjectivity::NonSubjective
    }))
}

pub fn init_template_for(subj: Subjectivity) -> TemplateId {
    match subj {
        Subjectivity::Subjective => TemplateId::InitSubjective,
        Subjectivity::NonSubjective => TemplateId::InitNonSubjective,
    }
}

/// Sends `history` (ending with a user turn), appends the reply, and parses a
/// verdict. A reply without one gets a single re-prompt with
/// [`VERDICT_REMINDER`]; both exchanges stay in the history.
pub async fn reply_with_verdict(
    agents: &Agents,
    role: AgentRole,
    round: usize,
    history: &mut Vec<Message>,
) -> Result<Opinion, OpinionError> {
    let mut raw = agents.ask(role, history).await?;
    history.push(Message::assistant(raw.clone()));
    let verdict = match extract_verdict(&raw) {
        Some(v) => v,
        None => {
            warn!(%role, round, "no verdict in reply; re-prompting once");
            history.push(Message::user(VERDICT_REMINDER));
            raw = agents.ask(role, history).await?;
            history.push(Message::assistant(raw.clone()));
            extract_verdict(&raw).ok_or_else(|| OpinionError::VerdictUnparseable {
                role,
                round,
                raw: raw.clone(),
            })?
        }
    };
    Ok(Opinion {
        agent: role,
        round,
        raw_text: raw,
        verdict,
    })
}

/// A debater's round-0 opinion and the conversation that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialOpinion {
    pub opinion: Opinion,
    pub conversation: Vec<Message>,
}

pub fn render_initial_prompt(
    agents: &Agents,
    claim: &Claim,
    comments: &[Comment],
    subj: Subjectivity,
) -> Result<String, TemplateError> {
    let block = comment_block(comments.iter().map(|c| c.text.as_str()));
    agents
        .prompts()
        .get(agents.locale_for(claim), init_template_for(subj))
        .render(&[("Claim", &claim.text), ("Comment", &block)])
}

/// Seeds a debater with its stance comments. `comments` must already be in
/// rank order; `subj` picks the prompt family.
pub async fn generate_initial_opinion(
    agents: &Agents,
    claim: &Claim,
    comments: &[Comment],
    stance: AgentRole,
    subj: Subjectivity,
) -> Result<InitialOpinion, OpinionError> {
    if !stance.is_debater() {
        return Err(OpinionError::NotADebater(stance));
    }
    let prompt = render_initial_prompt(agents, claim, comments, subj)?;
    let mut conversation = vec![
        Message::system(agents.prompts().debater_preamble(agents.locale_for(claim))),
        Message::user(prompt),
    ];
    let opinion = reply_with_verdict(agents, stance, 0, &mut conversation).await?;
    Ok(InitialOpinion {
        opinion,
        conversation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{BackendConfig, Gateway, Rule, ScriptedBackend};
    use crate::model::{Locale, Verdict};
    use std::sync::Arc;

    fn agents(rules: Vec<Rule>) -> Agents {
        let g = Gateway::new(Arc::new(ScriptedBackend::new(rules).unwrap()));
        Agents::new(Arc::new(g), BackendConfig::default())
    }

    fn claim() -> Claim {
        Claim::new("c1", "Hot water kills the virus.", None, Locale::En).unwrap()
    }

    #[tokio::test]
    async fn subjectivity_replies() {
        let a = agents(vec![Rule::always("Yes")]);
        assert_eq!(classify_subjectivity(&a, &claim()).await.unwrap(), Subjectivity::Subjective);
        let a = agents(vec![Rule::always("No, it makes a factual claim about vaccines.")]);
        assert_eq!(classify_subjectivity(&a, &claim()).await.unwrap(), Subjectivity::NonSubjective);
        let a = agents(vec![Rule::always("It is hard to say.")]);
        assert_eq!(classify_subjectivity(&a, &claim()).await.unwrap(), Subjectivity::NonSubjective);
    }

    #[tokio::test]
    async fn empty_stance_set_still_generates() {
        let a = agents(vec![
            Rule::contains("(no comments)", "Nothing to go on, so: Real"),
            Rule::always("unexpected"),
        ]);
        let init = generate_initial_opinion(&a, &claim(), &[], AgentRole::DebaterP, Subjectivity::NonSubjective)
            .await
            .unwrap();
        assert_eq!(init.opinion.verdict, Verdict::Real);
        assert_eq!(init.opinion.round, 0);
        assert_eq!(init.conversation.len(), 3);
    }

    #[tokio::test]
    async fn subjective_route_uses_subjective_prompt() {
        let a = agents(vec![Rule::always("...therefore the answer is Fake.")]);
        let comments = vec![Comment::new("so funny", 1.0).unwrap()];
        let prompt = render_initial_prompt(&a, &claim(), &comments, Subjectivity::Subjective).unwrap();
        assert!(prompt.contains("context, humor, satire, and cultural references"));
        assert!(prompt.contains("Comment: 1. so funny"));
        let init = generate_initial_opinion(&a, &claim(), &comments, AgentRole::DebaterN, Subjectivity::Subjective)
            .await
            .unwrap();
        assert_eq!(init.opinion.verdict, Verdict::Fake);
        assert_eq!(init.opinion.agent, AgentRole::DebaterN);
        assert_eq!(init.conversation[1].text, prompt);
    }

    #[tokio::test]
    async fn reprompt_once_then_fail() {
        let a = agents(vec![Rule::always("I cannot determine this.")]);
        let err = generate_initial_opinion(&a, &claim(), &[], AgentRole::DebaterP, Subjectivity::Subjective)
            .await
            .unwrap_err();
        assert!(matches!(err, OpinionError::VerdictUnparseable { round: 0, .. }));
    }

    #[tokio::test]
    async fn reprompt_recovers() {
        let a = agents(vec![
            Rule::contains(VERDICT_REMINDER, "Fake"),
            Rule::always("Unsure."),
        ]);
        let init = generate_initial_opinion(&a, &claim(), &[], AgentRole::DebaterP, Subjectivity::Subjective)
            .await
            .unwrap();
        assert_eq!(init.opinion.verdict, Verdict::Fake);
        assert_eq!(init.opinion.raw_text, "Fake");
        // system, prompt, bad reply, reminder, good reply
        assert_eq!(init.conversation.len(), 5);
    }

    #[tokio::test]
    async fn non_debater_rejected() {
        let a = agents(vec![Rule::always("Real")]);
        assert_eq!(
            generate_initial_opinion(&a, &claim(), &[], AgentRole::Judge, Subjectivity::Subjective)
                .await
                .unwrap_err(),
            OpinionError::NotADebater(AgentRole::Judge)
        );
    }

    #[tokio::test]
    async fn locale_selects_template_language() {
        let a = agents(vec![Rule::always("Real")]).with_locale(Some(Locale::Zh));
        let p = render_initial_prompt(&a, &claim(), &[], Subjectivity::NonSubjective).unwrap();
        assert!(p.contains("原帖：Hot water kills the virus."));
    }
}
