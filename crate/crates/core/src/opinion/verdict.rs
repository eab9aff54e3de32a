use std::sync::LazyLock;

use regex::Regex;

use crate::model::{Subjectivity, Verdict};

/// Appended once when a reply carries no verdict.
pub const VERDICT_REMINDER: &str = "Answer with exactly one word: Fake or Real.";

static VERDICT_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(fake|real)\b").unwrap());
static YES_NO_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(yes|no)\b").unwrap());

/// The last standalone "fake" or "real" (any case) decides. `None` when the
/// text contains neither word.
pub fn extract_verdict(raw: &str) -> Option<Verdict> {
    VERDICT_TOKEN.find_iter(raw).last().map(|m| {
        if m.as_str().eq_ignore_ascii_case("fake") {
            Verdict::Fake
        } else {
            Verdict::Real
        }
    })
}

/// First standalone yes/no decides; `None` when neither appears.
pub fn parse_subjectivity(reply: &str) -> Option<Subjectivity> {
    YES_NO_TOKEN.find(reply).map(|m| {
        if m.as_str().eq_ignore_ascii_case("yes") {
            Subjectivity::Subjective
        } else {
            Subjectivity::NonSubjective
        }
    })
}
