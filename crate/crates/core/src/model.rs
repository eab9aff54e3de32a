//! Domain types shared by every stage of the pipeline.
//!
//! Everything here is a plain value: constructed once, validated on the way
//! in, and never mutated afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("claim text is empty")]
    EmptyClaim,
    #[error("comment text is empty")]
    EmptyComment,
    #[error("comment delay must be a finite non-negative number of seconds, got {0}")]
    InvalidDelay(f64),
    #[error("unknown label {0:?}, expected \"rumor\" or \"non-rumor\"")]
    UnknownLabel(String),
}

/// Gold veracity label. Rumor is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "rumor")]
    Rumor,
    #[serde(rename = "non-rumor")]
    NonRumor,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Rumor => "rumor",
            Label::NonRumor => "non-rumor",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ModelError> {
        match s {
            "rumor" => Ok(Label::Rumor),
            "non-rumor" => Ok(Label::NonRumor),
            other => Err(ModelError::UnknownLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The answer an agent gives in its reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Fake,
    Real,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Fake => "Fake",
            Verdict::Real => "Real",
        })
    }
}

/// Fake maps to Rumor, Real maps to NonRumor.
pub fn label_from_verdict(v: Verdict) -> Label {
    match v {
        Verdict::Fake => Label::Rumor,
        Verdict::Real => Label::NonRumor,
    }
}

pub fn verdict_from_label(l: Label) -> Verdict {
    match l {
        Label::Rumor => Verdict::Fake,
        Label::NonRumor => Verdict::Real,
    }
}

/// Platform locale of a claim; selects the prompt language.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Locale {
    #[default]
    #[serde(rename = "EN", alias = "en")]
    En,
    #[serde(rename = "ZH", alias = "zh")]
    Zh,
}

impl Locale {
    pub fn as_str(self) -> &'static str {
        match self {
            Locale::En => "EN",
            Locale::Zh => "ZH",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
    pub platform_locale: Locale,
}

impl Claim {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        label: Option<Label>,
        platform_locale: Locale,
    ) -> Result<Self, ModelError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ModelError::EmptyClaim);
        }
        Ok(Self {
            id: id.into(),
            text,
            label,
            platform_locale,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub text: String,
    /// Seconds after the claim was posted.
    pub delay: f64,
}

impl Comment {
    pub fn new(text: impl Into<String>, delay: f64) -> Result<Self, ModelError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ModelError::EmptyComment);
        }
        if !delay.is_finite() || delay < 0.0 {
            return Err(ModelError::InvalidDelay(delay));
        }
        Ok(Self { text, delay })
    }
}

/// A claim together with its comments in posting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thread {
    pub claim: Claim,
    comments: Vec<Comment>,
}

impl Thread {
    /// Sorts comments by delay; equal delays keep their input order.
    pub fn new(claim: Claim, mut comments: Vec<Comment>) -> Self {
        comments.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        Self { claim, comments }
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    /// The thread restricted to its first `n` comments.
    pub fn truncated(&self, n: usize) -> Thread {
        Thread {
            claim: self.claim.clone(),
            comments: self.comments.iter().take(n).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredComment {
    pub comment: Comment,
    /// Support for the claim in `[-1, 1]`; zero means excluded.
    pub score: f64,
    pub rationale: String,
}

impl ScoredComment {
    /// Clamps `score` into `[-1, 1]`. NaN becomes 0.
    pub fn new(comment: Comment, score: f64, rationale: impl Into<String>) -> Self {
        let score = if score.is_nan() {
            0.0
        } else {
            score.clamp(-1.0, 1.0)
        };
        Self {
            comment,
            score,
            rationale: rationale.into(),
        }
    }
}

/// Supporting set P and opposing set N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceSets {
    /// Positive scores, strongest first.
    pub support: Vec<ScoredComment>,
    /// Negative scores, strongest opposition first.
    pub oppose: Vec<ScoredComment>,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentRole {
    DebaterP,
    DebaterN,
    Judge,
    Scorer,
    SubjectivityClassifier,
}

impl AgentRole {
    pub const ALL: [AgentRole; 5] = [
        AgentRole::DebaterP,
        AgentRole::DebaterN,
        AgentRole::Judge,
        AgentRole::Scorer,
        AgentRole::SubjectivityClassifier,
    ];

    pub fn is_debater(self) -> bool {
        matches!(self, AgentRole::DebaterP | AgentRole::DebaterN)
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subjectivity {
    Subjective,
    NonSubjective,
}

/// One agent's reply at one round. Round 0 is the initial opinion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub agent: AgentRole,
    pub round: usize,
    pub raw_text: String,
    pub verdict: Verdict,
}
