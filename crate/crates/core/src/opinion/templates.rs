//! Prompt templates with `{Name}` placeholders.
//!
//! The built-in library ships every template in English and Chinese. English
//! bodies reproduce the published instruction wording; the Chinese bodies are
//! translations and have not been validated experimentally.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::Locale;

/// Bumped whenever any built-in body changes.
pub const TEMPLATE_VERSION: &str = "1";

pub const KNOWN_PLACEHOLDERS: [&str; 5] =
    ["Claim", "Comment", "OtherAnswers", "AgentPReply", "AgentNReply"];

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{([A-Za-z][A-Za-z0-9_]*)\}").unwrap());

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("template {template:?} has no binding for placeholder {{{name}}}")]
    Unbound { template: TemplateId, name: String },
    #[error("template {template:?} uses unknown placeholder {{{name}}}")]
    UnknownPlaceholder { template: TemplateId, name: String },
    #[error("missing template file {0}")]
    Missing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateId {
    StanceScore,
    SubjectivityProbe,
    InitSubjective,
    InitNonSubjective,
    DebateTurn,
    JudgeVerdict,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::StanceScore,
        TemplateId::SubjectivityProbe,
        TemplateId::InitSubjective,
        TemplateId::InitNonSubjective,
        TemplateId::DebateTurn,
        TemplateId::JudgeVerdict,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            TemplateId::StanceScore => "stance_score",
            TemplateId::SubjectivityProbe => "subjectivity_probe",
            TemplateId::InitSubjective => "init_subjective",
            TemplateId::InitNonSubjective => "init_nonsubjective",
            TemplateId::DebateTurn => "debate_turn",
            TemplateId::JudgeVerdict => "judge_verdict",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub locale: Locale,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(id: TemplateId, locale: Locale, body: impl Into<String>) -> Result<Self, TemplateError> {
        let t = Self {
            id,
            locale,
            body: body.into(),
        };
        if let Some(name) = t
            .placeholders()
            .into_iter()
            .find(|p| !KNOWN_PLACEHOLDERS.contains(p))
        {
            return Err(TemplateError::UnknownPlaceholder {
                template: id,
                name: name.to_string(),
            });
        }
        Ok(t)
    }

    pub fn placeholders(&self) -> Vec<&str> {
        PLACEHOLDER
            .captures_iter(&self.body)
            .map(|c| c.get(1).unwrap().as_str())
            .collect()
    }

    /// Substitutes every placeholder. Bound values are inserted literally and
    /// never re-scanned, so a claim containing `{Comment}` stays as typed.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        let lookup = |name: &str| bindings.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
        if let Some(name) = self.placeholders().into_iter().find(|p| lookup(p).is_none()) {
            return Err(TemplateError::Unbound {
                template: self.id,
                name: name.to_string(),
            });
        }
        Ok(PLACEHOLDER
            .replace_all(&self.body, |c: &regex::Captures| lookup(&c[1]).unwrap().to_string())
            .into_owned())
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.body.as_bytes()))
    }
}

macro_rules! asset {
    ($locale:literal, $stem:literal) => {
        include_str!(concat!("../../assets/prompts/", $locale, "/", $stem, ".txt"))
    };
}

fn builtin_body(locale: Locale, id: TemplateId) -> &'static str {
    match (locale, id) {
        (Locale::En, TemplateId::StanceScore) => asset!("en", "stance_score"),
        (Locale::En, TemplateId::SubjectivityProbe) => asset!("en", "subjectivity_probe"),
        (Locale::En, TemplateId::InitSubjective) => asset!("en", "init_subjective"),
        (Locale::En, TemplateId::InitNonSubjective) => asset!("en", "init_nonsubjective"),
        (Locale::En, TemplateId::DebateTurn) => asset!("en", "debate_turn"),
        (Locale::En, TemplateId::JudgeVerdict) => asset!("en", "judge_verdict"),
        (Locale::Zh, TemplateId::StanceScore) => asset!("zh", "stance_score"),
        (Locale::Zh, TemplateId::SubjectivityProbe) => asset!("zh", "subjectivity_probe"),
        (Locale::Zh, TemplateId::InitSubjective) => asset!("zh", "init_subjective"),
        (Locale::Zh, TemplateId::InitNonSubjective) => asset!("zh", "init_nonsubjective"),
        (Locale::Zh, TemplateId::DebateTurn) => asset!("zh", "debate_turn"),
        (Locale::Zh, TemplateId::JudgeVerdict) => asset!("zh", "judge_verdict"),
    }
}

fn builtin_preamble(locale: Locale) -> &'static str {
    match locale {
        Locale::En => asset!("en", "debater_preamble"),
        Locale::Zh => asset!("zh", "debater_preamble"),
    }
}

fn strip_final_newline(s: &str) -> &str {
    s.strip_suffix('\n').unwrap_or(s)
}

/// Every template for both locales plus the debater system preamble.
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    templates: BTreeMap<(u8, TemplateId), PromptTemplate>,
    preambles: [String; 2],
}

fn locale_key(l: Locale) -> u8 {
    match l {
        Locale::En => 0,
        Locale::Zh => 1,
    }
}

impl PromptLibrary {
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for locale in [Locale::En, Locale::Zh] {
            for id in TemplateId::ALL {
                let t = PromptTemplate::new(id, locale, strip_final_newline(builtin_body(locale, id)))
                    .expect("built-in templates use known placeholders");
                templates.insert((locale_key(locale), id), t);
            }
        }
        Self {
            templates,
            preambles: [
                strip_final_newline(builtin_preamble(Locale::En)).to_string(),
                strip_final_newline(builtin_preamble(Locale::Zh)).to_string(),
            ],
        }
    }

    /// Loads `<dir>/<en|zh>/<stem>.txt` for every template and the
    /// `debater_preamble.txt` of each locale. Any missing file is an error.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let dir = dir.as_ref();
        let read = |p: std::path::PathBuf| {
            std::fs::read_to_string(&p).map_err(|_| TemplateError::Missing(p.display().to_string()))
        };
        let mut templates = BTreeMap::new();
        let mut preambles: [String; 2] = Default::default();
        for locale in [Locale::En, Locale::Zh] {
            let sub = dir.join(locale.as_str().to_lowercase());
            for id in TemplateId::ALL {
                let body = read(sub.join(format!("{}.txt", id.file_stem())))?;
                let t = PromptTemplate::new(id, locale, strip_final_newline(&body))?;
                templates.insert((locale_key(locale), id), t);
            }
            preambles[locale_key(locale) as usize] =
                strip_final_newline(&read(sub.join("debater_preamble.txt"))?).to_string();
        }
        Ok(Self { templates, preambles })
    }

    pub fn get(&self, locale: Locale, id: TemplateId) -> &PromptTemplate {
        &self.templates[&(locale_key(locale), id)]
    }

    pub fn debater_preamble(&self, locale: Locale) -> &str {
        &self.preambles[locale_key(locale) as usize]
    }

    /// `"<locale>/<template>"` → SHA-256 of the body, for run manifests.
    pub fn digests(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .templates
            .values()
            .map(|t| (format!("{}/{}", t.locale.as_str(), t.id.file_stem()), t.digest()))
            .collect();
        for locale in [Locale::En, Locale::Zh] {
            out.insert(
                format!("{}/debater_preamble", locale.as_str()),
                hex::encode(Sha256::digest(self.debater_preamble(locale).as_bytes())),
            );
        }
        out
    }
}

impl Default for PromptLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Rank-prefixed, newline-separated comment list; `(no comments)` when empty.
pub fn comment_block<'a>(texts: impl IntoIterator<Item = &'a str>) -> String {
    let lines: Vec<String> = texts
        .into_iter()
        .enumerate()
        .map(|(i, t)| format!("{}. {}", i + 1, t))
        .collect();
    if lines.is_empty() {
        "(no comments)".to_string()
    } else {
        lines.join("\n")
    }
}
