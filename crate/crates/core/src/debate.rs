//! The detection pipeline: stance separation, initial opinions, simultaneous
//! debate rounds, and the judge fallback.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::debug;

use crate::agents::Agents;
use crate::gateway::{GatewayError, Message};
use crate::model::{
    label_from_verdict, AgentRole, Claim, Comment, Label, Opinion, StanceSets, Subjectivity, Thread,
    Verdict,
};
use crate::opinion::{
    classify_subjectivity, generate_initial_opinion, init_template_for, reply_with_verdict,
    InitialOpinion, OpinionError, TemplateId,
};
use crate::stance::{score_all, separate_stances, StanceConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DebateError {
    #[error(transparent)]
    Opinion(#[from] OpinionError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("debaters already agree; the judge is only consulted on disagreement")]
    ConsensusReached,
    #[error("round {round} needs both round-{prev} opinions, got rounds {got_p} and {got_n}", prev = round - 1)]
    RoundMismatch {
        round: usize,
        got_p: usize,
        got_n: usize,
    },
}

/// Pipeline stages switched off or overridden for ablation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationFlags {
    /// Random halves of a comment sample instead of P and N.
    pub skip_stance_separation: bool,
    /// Subjective prompt for every claim.
    pub force_subjective_prompt: bool,
    /// Non-subjective prompt for every claim.
    pub force_nonsubjective_prompt: bool,
    /// One agent's initial opinion is the answer.
    pub skip_debate: bool,
}

impl AblationFlags {
    pub fn validate(&self) -> Result<(), String> {
        if self.force_subjective_prompt && self.force_nonsubjective_prompt {
            return Err("cannot force both the subjective and the non-subjective prompt".into());
        }
        Ok(())
    }

    /// Table-style name of the configuration, e.g. "w/o Debate".
    pub fn mode_label(&self) -> String {
        let mut parts = Vec::new();
        if self.skip_stance_separation {
            parts.push("w/o Stance");
        }
        // Forcing the subjective prompt removes the non-subjective route.
        if self.force_subjective_prompt {
            parts.push("w/o Non-Sub");
        }
        if self.force_nonsubjective_prompt {
            parts.push("w/o Sub");
        }
        if self.skip_debate {
            parts.push("w/o Debate");
        }
        if parts.is_empty() {
            "Full Model".to_string()
        } else {
            parts.join(" + ")
        }
    }

    fn forced_route(&self) -> Option<Subjectivity> {
        if self.force_subjective_prompt {
            Some(Subjectivity::Subjective)
        } else if self.force_nonsubjective_prompt {
            Some(Subjectivity::NonSubjective)
        } else {
            None
        }
    }
}

/// Order in which the two debaters' requests are issued within a round.
/// Results never depend on it; it exists so that can be checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateOrder {
    #[default]
    Concurrent,
    PFirst,
    NFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DebateConfig {
    pub max_rounds: usize,
    pub early_exit_on_consensus: bool,
    pub ablation: AblationFlags,
    #[serde(skip)]
    pub update_order: UpdateOrder,
    /// Concurrent scorer requests per claim.
    pub scoring_concurrency: usize,
}

impl Default for DebateConfig {
    fn default() -> Self {
        Self {
            max_rounds: 2,
            early_exit_on_consensus: false,
            ablation: AblationFlags::default(),
            update_order: UpdateOrder::Concurrent,
            scoring_concurrency: 8,
        }
    }
}

/// One debater's running conversation. Only ever appended to.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    role: AgentRole,
    history: Vec<Message>,
    prompt_digests: Vec<PromptDigest>,
}

impl AgentState {
    pub fn from_initial(role: AgentRole, init: InitialOpinion) -> Self {
        let prompt_digests = init
            .conversation
            .iter()
            .find(|m| m.speaker == crate::gateway::Speaker::User)
            .map(|m| PromptDigest::of(role, 0, &m.text))
            .into_iter()
            .collect();
        Self {
            role,
            history: init.conversation,
            prompt_digests,
        }
    }

    pub fn role(&self) -> AgentRole {
        self.role
    }

    pub fn history(&self) -> &[Message] {
        &self.history
    }
}

/// SHA-256 of a rendered prompt, recorded per agent and round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDigest {
    pub agent: AgentRole,
    pub round: usize,
    pub digest: String,
}

impl PromptDigest {
    pub fn of(agent: AgentRole, round: usize, prompt: &str) -> Self {
        Self {
            agent,
            round,
            digest: hex::encode(Sha256::digest(prompt.as_bytes())),
        }
    }
}

fn debate_prompt(agents: &Agents, claim: &Claim, other: &Opinion) -> String {
    agents
        .prompts()
        .get(agents.locale_for(claim), TemplateId::DebateTurn)
        .render(&[("OtherAnswers", &other.raw_text)])
        .expect("debate turn binds OtherAnswers only")
}

/// Round `round` for both debaters. Each sees the other's round-(j-1) reply;
/// neither sees anything produced in this round. States are only updated
/// once both replies are in.
#[allow(clippy::too_many_arguments)]
pub async fn run_debate_round(
    agents: &Agents,
    claim: &Claim,
    state_p: &mut AgentState,
    state_n: &mut AgentState,
    prev_p: &Opinion,
    prev_n: &Opinion,
    round: usize,
    order: UpdateOrder,
) -> Result<(Opinion, Opinion), DebateError> {
    if round == 0 || prev_p.round + 1 != round || prev_n.round + 1 != round {
        return Err(DebateError::RoundMismatch {
            round: round.max(1),
            got_p: prev_p.round,
            got_n: prev_n.round,
        });
    }
    let prompt_p = debate_prompt(agents, claim, prev_n);
    let prompt_n = debate_prompt(agents, claim, prev_p);
    let mut hist_p = state_p.history.clone();
    hist_p.push(Message::user(prompt_p.clone()));
    let mut hist_n = state_n.history.clone();
    hist_n.push(Message::user(prompt_n.clone()));

    let (op_p, op_n) = match order {
        UpdateOrder::Concurrent => {
            let (a, b) = tokio::join!(
                reply_with_verdict(agents, state_p.role, round, &mut hist_p),
                reply_with_verdict(agents, state_n.role, round, &mut hist_n),
            );
            (a?, b?)
        }
        UpdateOrder::PFirst => {
            let a = reply_with_verdict(agents, state_p.role, round, &mut hist_p).await?;
            let b = reply_with_verdict(agents, state_n.role, round, &mut hist_n).await?;
            (a, b)
        }
        UpdateOrder::NFirst => {
            let b = reply_with_verdict(agents, state_n.role, round, &mut hist_n).await?;
            let a = reply_with_verdict(agents, state_p.role, round, &mut hist_p).await?;
            (a, b)
        }
    };
    state_p.history = hist_p;
    state_p.prompt_digests.push(PromptDigest::of(state_p.role, round, &prompt_p));
    state_n.history = hist_n;
    state_n.prompt_digests.push(PromptDigest::of(state_n.role, round, &prompt_n));
    Ok((op_p, op_n))
}

/// Agreement is on extracted verdicts, not on wording.
pub fn check_consensus(op_p: &Opinion, op_n: &Opinion) -> bool {
    debug_assert_eq!(op_p.round, op_n.round, "consensus compares same-round opinions");
    op_p.verdict == op_n.verdict
}

pub fn render_judge_prompt(agents: &Agents, claim: &Claim, last_p: &Opinion, last_n: &Opinion) -> String {
    agents
        .prompts()
        .get(agents.locale_for(claim), TemplateId::JudgeVerdict)
        .render(&[
            ("Claim", &claim.text),
            ("AgentPReply", &last_p.raw_text),
            ("AgentNReply", &last_n.raw_text),
        ])
        .expect("judge template binds Claim and both replies")
}

/// Final verdict when the debaters disagree. The judge sees the claim and
/// the two last replies only.
pub async fn judge_verdict(
    agents: &Agents,
    claim: &Claim,
    last_p: &Opinion,
    last_n: &Opinion,
) -> Result<Opinion, DebateError> {
    if check_consensus(last_p, last_n) {
        return Err(DebateError::ConsensusReached);
    }
    let mut conversation = vec![Message::user(render_judge_prompt(agents, claim, last_p, last_n))];
    Ok(reply_with_verdict(agents, AgentRole::Judge, last_p.round, &mut conversation).await?)
}

/// Comments each side was seeded with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Evidence {
    StanceSeparated {
        sets: StanceSets,
    },
    /// A seeded sample of up to 2k comments cut into two halves.
    RandomSplit {
        seed: u64,
        first: Vec<Comment>,
        second: Vec<Comment>,
    },
}

impl Evidence {
    fn sides(&self) -> (Vec<Comment>, Vec<Comment>) {
        match self {
            Evidence::StanceSeparated { sets } => (
                sets.support.iter().map(|s| s.comment.clone()).collect(),
                sets.oppose.iter().map(|s| s.comment.clone()).collect(),
            ),
            Evidence::RandomSplit { first, second, .. } => (first.clone(), second.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateTranscript {
    pub claim_id: String,
    pub gold: Option<Label>,
    pub subjectivity: Subjectivity,
    /// Template used for the initial opinions.
    pub initial_template: TemplateId,
    pub ablation: AblationFlags,
    pub evidence: Evidence,
    /// Round-major: P then N for each round (just P when debate is skipped).
    pub opinions: Vec<Opinion>,
    pub consensus: bool,
    pub judge_opinion: Option<Opinion>,
    pub final_verdict: Verdict,
    pub rounds_run: usize,
    pub prompt_digests: Vec<PromptDigest>,
}

impl DebateTranscript {
    pub fn predicted_label(&self) -> Label {
        label_from_verdict(self.final_verdict)
    }

    pub fn judge_used(&self) -> bool {
        self.judge_opinion.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Scoring,
    Subjectivity,
    InitialOpinion,
    Debate,
    Judge,
}

/// A claim the pipeline gave up on, with whatever was produced before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimAbort {
    pub claim_id: String,
    pub stage: Stage,
    pub error: String,
    pub opinions: Vec<Opinion>,
}

/// Per-claim seed for the random-split ablation, independent of processing
/// order.
pub fn claim_seed(run_seed: u64, claim_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update(claim_id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Seeded sample of up to `2k` comments, split into two halves.
pub fn random_split(comments: &[Comment], k: usize, seed: u64) -> (Vec<Comment>, Vec<Comment>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = comments.len().min(2 * k);
    let picked: Vec<Comment> = rand::seq::index::sample(&mut rng, comments.len(), amount)
        .into_iter()
        .map(|i| comments[i].clone())
        .collect();
    let half = picked.len().div_ceil(2);
    let (a, b) = picked.split_at(half);
    (a.to_vec(), b.to_vec())
}

/// Runs the whole pipeline on one thread.
pub async fn detect(
    agents: &Agents,
    thread: &Thread,
    cfg: &DebateConfig,
    stance_cfg: &StanceConfig,
    seed: u64,
) -> Result<DebateTranscript, ClaimAbort> {
    let claim = &thread.claim;
    let flags = cfg.ablation;
    let mut opinions: Vec<Opinion> = Vec::new();
    let abort = |stage: Stage, e: &dyn std::fmt::Display, opinions: &[Opinion]| ClaimAbort {
        claim_id: claim.id.clone(),
        stage,
        error: e.to_string(),
        opinions: opinions.to_vec(),
    };

    let evidence = if flags.skip_stance_separation {
        let seed = claim_seed(seed, &claim.id);
        let (first, second) = random_split(thread.comments(), stance_cfg.k, seed);
        Evidence::RandomSplit { seed, first, second }
    } else {
        let scored = score_all(agents, claim, thread.comments(), stance_cfg, cfg.scoring_concurrency)
            .await
            .map_err(|e| abort(Stage::Scoring, &e, &opinions))?;
        Evidence::StanceSeparated {
            sets: separate_stances(&scored, stance_cfg.k),
        }
    };

    let subjectivity = classify_subjectivity(agents, claim)
        .await
        .map_err(|e| abort(Stage::Subjectivity, &e, &opinions))?;
    let route = flags.forced_route().unwrap_or(subjectivity);
    let (p_side, n_side) = evidence.sides();
    debug!(claim = %claim.id, ?route, p = p_side.len(), n = n_side.len(), "evidence ready");

    if flags.skip_debate {
        let merged: Vec<Comment> = p_side.into_iter().chain(n_side).collect();
        let init = generate_initial_opinion(agents, claim, &merged, AgentRole::DebaterP, route)
            .await
            .map_err(|e| abort(Stage::InitialOpinion, &e, &opinions))?;
        let state = AgentState::from_initial(AgentRole::DebaterP, init.clone());
        return Ok(DebateTranscript {
            claim_id: claim.id.clone(),
            gold: claim.label,
            subjectivity,
            initial_template: init_template_for(route),
            ablation: flags,
            evidence,
            final_verdict: init.opinion.verdict,
            opinions: vec![init.opinion],
            consensus: true,
            judge_opinion: None,
            rounds_run: 0,
            prompt_digests: state.prompt_digests,
        });
    }

    let (init_p, init_n) = tokio::join!(
        generate_initial_opinion(agents, claim, &p_side, AgentRole::DebaterP, route),
        generate_initial_opinion(agents, claim, &n_side, AgentRole::DebaterN, route),
    );
    let init_p = init_p.map_err(|e| abort(Stage::InitialOpinion, &e, &opinions))?;
    opinions.push(init_p.opinion.clone());
    let init_n = init_n.map_err(|e| abort(Stage::InitialOpinion, &e, &opinions))?;
    opinions.push(init_n.opinion.clone());

    let mut last_p = init_p.opinion.clone();
    let mut last_n = init_n.opinion.clone();
    let mut state_p = AgentState::from_initial(AgentRole::DebaterP, init_p);
    let mut state_n = AgentState::from_initial(AgentRole::DebaterN, init_n);

    let mut rounds_run = 0;
    for round in 1..=cfg.max_rounds {
        if cfg.early_exit_on_consensus && check_consensus(&last_p, &last_n) {
            break;
        }
        let (p, n) = run_debate_round(
            agents,
            claim,
            &mut state_p,
            &mut state_n,
            &last_p,
            &last_n,
            round,
            cfg.update_order,
        )
        .await
        .map_err(|e| abort(Stage::Debate, &e, &opinions))?;
        opinions.push(p.clone());
        opinions.push(n.clone());
        last_p = p;
        last_n = n;
        rounds_run = round;
    }

    let mut prompt_digests = state_p.prompt_digests;
    prompt_digests.extend(state_n.prompt_digests);
    prompt_digests.sort_by_key(|d| (d.round, d.agent));

    let consensus = check_consensus(&last_p, &last_n);
    let (judge_opinion, final_verdict) = if consensus {
        (None, last_p.verdict)
    } else {
        let prompt = render_judge_prompt(agents, claim, &last_p, &last_n);
        prompt_digests.push(PromptDigest::of(AgentRole::Judge, rounds_run, &prompt));
        let j = judge_verdict(agents, claim, &last_p, &last_n)
            .await
            .map_err(|e| abort(Stage::Judge, &e, &opinions))?;
        let v = j.verdict;
        (Some(j), v)
    };

    Ok(DebateTranscript {
        claim_id: claim.id.clone(),
        gold: claim.label,
        subjectivity,
        initial_template: init_template_for(route),
        ablation: flags,
        evidence,
        opinions,
        consensus,
        judge_opinion,
        final_verdict,
        rounds_run,
        prompt_digests,
    })
}

/// Bundles everything needed to run [`detect`] over many claims.
#[derive(Clone)]
pub struct Detector {
    pub agents: Agents,
    pub debate: DebateConfig,
    pub stance: StanceConfig,
    pub seed: u64,
}

impl Detector {
    pub async fn detect(&self, thread: &Thread) -> Result<DebateTranscript, ClaimAbort> {
        detect(&self.agents, thread, &self.debate, &self.stance, self.seed).await
    }
}
