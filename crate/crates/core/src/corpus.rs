//! Thread corpora: JSONL loading, early-detection truncation, and seeded
//! synthetic fixtures.
//!
//! One record per line:
//!
//! ```json
//! {"claim_id":"t1","claim_text":"...","label":"rumor","locale":"EN",
//!  "comments":[{"text":"no way","delay_s":60}]}
//! ```
//!
//! `label` is `"rumor"` or `"non-rumor"` and may be omitted for unlabeled
//! claims. `locale` is `"EN"` or `"ZH"` and defaults to `"EN"`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Matcher, Rule};
use crate::model::{AgentRole, Claim, Comment, Label, Locale, Thread};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("reading corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub text: String,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub claim_id: String,
    pub claim_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "default_locale")]
    pub locale: String,
    #[serde(default)]
    pub comments: Vec<CommentRecord>,
}

fn default_locale() -> String {
    "EN".to_string()
}

impl CorpusRecord {
    pub fn into_thread(self) -> Result<Thread, String> {
        let label = self
            .label
            .as_deref()
            .map(Label::parse)
            .transpose()
            .map_err(|e| e.to_string())?;
        let locale = match self.locale.as_str() {
            "EN" | "en" => Locale::En,
            "ZH" | "zh" => Locale::Zh,
            other => return Err(format!("unknown locale {other:?}, expected \"EN\" or \"ZH\"")),
        };
        let claim = Claim::new(self.claim_id, self.claim_text, label, locale).map_err(|e| e.to_string())?;
        let comments = self
            .comments
            .into_iter()
            .enumerate()
            .map(|(i, c)| Comment::new(c.text, c.delay_s).map_err(|e| format!("comment {i}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Thread::new(claim, comments))
    }

    pub fn from_thread(thread: &Thread) -> Self {
        Self {
            claim_id: thread.claim.id.clone(),
            claim_text: thread.claim.text.clone(),
            label: thread.claim.label.map(|l| l.as_str().to_string()),
            locale: thread.claim.platform_locale.as_str().to_string(),
            comments: thread
                .comments()
                .iter()
                .map(|c| CommentRecord {
                    text: c.text.clone(),
                    delay_s: c.delay,
                })
                .collect(),
        }
    }
}

/// A skipped input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line_no: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub threads: Vec<Thread>,
    pub errors: Vec<LineError>,
}

impl LoadReport {
    pub fn loaded(&self) -> usize {
        self.threads.len()
    }

    pub fn skipped(&self) -> usize {
        self.errors.len()
    }

    /// Error report as JSONL of `{line_no, reason}`.
    pub fn write_errors(&self, mut w: impl Write) -> std::io::Result<()> {
        for e in &self.errors {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses JSONL from a reader. Bad lines are reported and skipped; blank
/// lines are ignored.
pub fn read_corpus(reader: impl BufRead) -> std::io::Result<LoadReport> {
    let mut report = LoadReport::default();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let result = serde_json::from_str::<CorpusRecord>(&line)
            .map_err(|e| format!("invalid record: {e}"))
            .and_then(CorpusRecord::into_thread)
            .and_then(|t| {
                if seen.insert(t.claim.id.clone()) {
                    Ok(t)
                } else {
                    Err(format!("duplicate claim_id {:?}", t.claim.id))
                }
            });
        match result {
            Ok(t) => report.threads.push(t),
            Err(reason) => report.errors.push(LineError { line_no, reason }),
        }
    }
    Ok(report)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadReport, CorpusError> {
    let path = path.as_ref();
    let io = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    read_corpus(BufReader::new(file)).map_err(io)
}

pub fn write_records(records: &[CorpusRecord], mut w: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_corpus(threads: &[Thread], w: impl Write) -> std::io::Result<()> {
    let records: Vec<CorpusRecord> = threads.iter().map(CorpusRecord::from_thread).collect();
    write_records(&records, w)
}

/// First `n` comments by posting delay; the claim is untouched.
pub fn truncate_by_count(thread: &Thread, n: usize) -> Thread {
    thread.truncated(n)
}

// Synthetic fixtures. Every claim template carries a distinctive key phrase
// so scripted rules can recognize it; every comment carries a planted stance
// phrase with a known score.

struct ClaimTemplate {
    key: &'static str,
    text: &'static str,
    subjective: bool,
    label: Label,
}

const CLAIM_TEMPLATES: &[ClaimTemplate] = &[
    ClaimTemplate {
        key: "gargling salt water",
        text: "BREAKING: gargling salt water every hour cures the virus in {city}, doctors stunned",
        subjective: false,
        label: Label::Rumor,
    },
    ClaimTemplate {
        key: "5G towers",
        text: "5G towers in {city} are spreading the infection, {n} people already sick",
        subjective: false,
        label: Label::Rumor,
    },
    ClaimTemplate {
        key: "health ministry reports",
        text: "The health ministry reports {n} new confirmed cases in {city} today",
        subjective: false,
        label: Label::NonRumor,
    },
    ClaimTemplate {
        key: "Mask mandate takes effect",
        text: "Mask mandate takes effect on public transit in {city} from Monday",
        subjective: false,
        label: Label::NonRumor,
    },
    ClaimTemplate {
        key: "the mayor secretly",
        text: "Honestly I bet the mayor secretly fled {city} while telling us all to stay home",
        subjective: true,
        label: Label::Rumor,
    },
    ClaimTemplate {
        key: "officials are hiding",
        text: "I feel like officials are hiding the real numbers in {city}, nobody trusts them anymore",
        subjective: true,
        label: Label::Rumor,
    },
    ClaimTemplate {
        key: "So proud of the nurses",
        text: "So proud of the nurses at {city} general hospital, they are heroes",
        subjective: true,
        label: Label::NonRumor,
    },
    ClaimTemplate {
        key: "Staying home is boring",
        text: "Staying home is boring but I think it is the right thing to do in {city}",
        subjective: true,
        label: Label::NonRumor,
    },
];

const CITIES: &[&str] = &["Wuhan", "Milan", "Seattle", "Madrid", "Tehran", "Daegu", "London", "Lagos"];

/// Planted stance phrases and the score the oracle scorer assigns them.
pub const PLANTED_PHRASES: &[(&str, f64)] = &[
    ("confirmed by officials", 0.9),
    ("source looks reliable", 0.6),
    ("my cousin saw it too", 0.3),
    ("this is fake news", -0.9),
    ("already debunked", -0.6),
    ("no evidence for this", -0.3),
    ("lol whatever", 0.0),
];

/// Deterministic synthetic threads: labels alternate starting with rumor
/// (so ⌈n/2⌉ rumors), subjectivity alternates in pairs.
pub fn synth_fixtures(seed: u64, n_claims: usize) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_claims)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Rumor } else { Label::NonRumor };
            let subjective = i % 4 < 2;
            let pool: Vec<&ClaimTemplate> = CLAIM_TEMPLATES
                .iter()
                .filter(|t| t.label == label && t.subjective == subjective)
                .collect();
            let t = pool[rng.random_range(0..pool.len())];
            let city = CITIES[rng.random_range(0..CITIES.len())];
            let text = t
                .text
                .replace("{city}", city)
                .replace("{n}", &rng.random_range(3..900u32).to_string());
            let n_comments = rng.random_range(4..=12usize);
            let mut delay = 0.0;
            let comments = (0..n_comments)
                .map(|j| {
                    delay += rng.random_range(5..600u32) as f64;
                    let (phrase, _) = PLANTED_PHRASES[rng.random_range(0..PLANTED_PHRASES.len())];
                    CommentRecord {
                        text: format!("#{j} {phrase}"),
                        delay_s: delay,
                    }
                })
                .collect();
            CorpusRecord {
                claim_id: format!("synth-{seed}-{i:04}"),
                claim_text: text,
                label: Some(label.as_str().to_string()),
                locale: "EN".to_string(),
                comments,
            }
        })
        .collect()
}

/// Scripted rules that answer every synthetic claim correctly: the scorer
/// scores planted phrases, the subjectivity probe follows the template, and
/// every debater and judge answers with the gold verdict. Comments never
/// influence a verdict.
pub fn synth_oracle_rules() -> Vec<Rule> {
    let mut rules: Vec<Rule> = PLANTED_PHRASES
        .iter()
        .map(|(phrase, score)| {
            Rule::always(format!(r#"{{"Reason": "planted phrase", "Score": "{score:.1}"}}"#))
                .for_role(AgentRole::Scorer)
                .and(Matcher::contains(*phrase))
        })
        .collect();
    rules.push(Rule::always(r#"{"Reason": "unknown", "Score": "0.0"}"#).for_role(AgentRole::Scorer));
    for t in CLAIM_TEMPLATES {
        let answer = if t.subjective { "Yes" } else { "No" };
        rules.push(Rule::contains(t.key, answer).for_role(AgentRole::SubjectivityClassifier));
    }
    for t in CLAIM_TEMPLATES {
        let verdict = match t.label {
            Label::Rumor => "Fake",
            Label::NonRumor => "Real",
        };
        rules.push(Rule::contains(
            t.key,
            format!("Weighing the post against what is known, my answer is {verdict}."),
        ));
    }
    rules
}
