//! Rumor-detection metrics, reports, and early-detection curves.
//!
//! Rumor is the positive class. Per-class F1 is `2PR/(P+R)` with precision or
//! recall taken as 0 when its denominator is 0, and F1 taken as 0 when
//! `P + R = 0`.

use std::io::Write;

use async_trait::async_trait;
use futures::StreamExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::truncate_by_count;
use crate::debate::{ClaimAbort, DebateTranscript, Detector};
use crate::model::{Label, Thread};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no labeled predictions to score")]
    EmptyInput,
    #[error("checkpoints must be strictly increasing, got {0:?}")]
    Checkpoints(Vec<usize>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: &[(Label, Label)]) -> Self {
        let mut m = Self::default();
        for &(gold, pred) in pairs {
            match (gold, pred) {
                (Label::Rumor, Label::Rumor) => m.tp += 1,
                (Label::NonRumor, Label::Rumor) => m.fp += 1,
                (Label::NonRumor, Label::NonRumor) => m.tn += 1,
                (Label::Rumor, Label::NonRumor) => m.fn_ += 1,
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Same counts seen with NonRumor as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fn_);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub rumor_f1: f64,
    pub nonrumor_f1: f64,
    pub confusion: ConfusionMatrix,
}

impl Metrics {
    pub fn from_confusion(m: ConfusionMatrix) -> Result<Self, EvalError> {
        if m.total() == 0 {
            return Err(EvalError::EmptyInput);
        }
        let rumor_f1 = f1(m.tp, m.fp, m.fn_);
        let nonrumor_f1 = f1(m.tn, m.fn_, m.fp);
        Ok(Self {
            accuracy: ratio(m.tp + m.tn, m.total()),
            macro_f1: (rumor_f1 + nonrumor_f1) / 2.0,
            rumor_f1,
            nonrumor_f1,
            confusion: m,
        })
    }
}

/// ACC, per-class F1 and macro-F1 over `(gold, predicted)` pairs.
pub fn compute_metrics(pairs: &[(Label, Label)]) -> Result<Metrics, EvalError> {
    Metrics::from_confusion(ConfusionMatrix::from_pairs(pairs))
}

/// One row of the per-claim table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRow {
    pub claim_id: String,
    pub gold: Option<Label>,
    pub predicted: Option<Label>,
    pub consensus: Option<bool>,
    pub judge_used: Option<bool>,
    pub rounds: Option<usize>,
    /// Abort reason; empty for completed claims.
    pub error: Option<String>,
}

impl ClaimRow {
    pub fn from_outcome(gold: Option<Label>, outcome: &Result<DebateTranscript, ClaimAbort>) -> Self {
        match outcome {
            Ok(t) => Self {
                claim_id: t.claim_id.clone(),
                gold,
                predicted: Some(t.predicted_label()),
                consensus: Some(t.consensus),
                judge_used: Some(t.judge_used()),
                rounds: Some(t.rounds_run),
                error: None,
            },
            Err(a) => Self {
                claim_id: a.claim_id.clone(),
                gold,
                predicted: None,
                consensus: None,
                judge_used: None,
                rounds: None,
                error: Some(a.error.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ablation_mode: String,
    pub run_config_digest: String,
    #[serde(flatten)]
    pub metrics: Metrics,
    /// Claims that entered the metrics.
    pub n_claims: usize,
    pub n_aborted: usize,
    pub n_unlabeled: usize,
    pub rows: Vec<ClaimRow>,
    pub generated_at: String,
}

impl EvalReport {
    /// Aborted and unlabeled claims are listed in `rows` but kept out of the
    /// metrics.
    pub fn from_rows(rows: Vec<ClaimRow>, ablation_mode: String, run_config_digest: String) -> Result<Self, EvalError> {
        let pairs: Vec<(Label, Label)> = rows
            .iter()
            .filter_map(|r| Some((r.gold?, r.predicted?)))
            .collect();
        let metrics = compute_metrics(&pairs)?;
        Ok(Self {
            ablation_mode,
            run_config_digest,
            metrics,
            n_claims: pairs.len(),
            n_aborted: rows.iter().filter(|r| r.error.is_some()).count(),
            n_unlabeled: rows.iter().filter(|r| r.gold.is_none() && r.error.is_none()).count(),
            rows,
            generated_at: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn write_rows_csv(&self, w: impl Write) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["claim_id", "gold", "predicted", "consensus", "judge_used", "rounds", "error"])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.claim_id.clone(),
                opt(r.gold.map(|l| l.to_string())),
                opt(r.predicted.map(|l| l.to_string())),
                opt(r.consensus.map(|b| b.to_string())),
                opt(r.judge_used.map(|b| b.to_string())),
                opt(r.rounds.map(|n| n.to_string())),
                opt(r.error.clone()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Anything that maps a thread to a label, or fails for that claim.
#[async_trait]
pub trait Predictor: Send + Sync {
    async fn predict(&self, thread: &Thread) -> Result<Label, String>;
}

#[async_trait]
impl Predictor for Detector {
    async fn predict(&self, thread: &Thread) -> Result<Label, String> {
        self.detect(thread)
            .await
            .map(|t| t.predicted_label())
            .map_err(|a| a.error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub checkpoint: usize,
    /// `None` when no labeled claim completed at this checkpoint.
    pub macro_f1: Option<f64>,
    pub n_aborted: usize,
}

pub fn validate_checkpoints(checkpoints: &[usize]) -> Result<(), EvalError> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::Checkpoints(checkpoints.to_vec()));
    }
    Ok(())
}

/// Macro-F1 after truncating every thread to each checkpoint's post count.
/// Up to `workers` claims are predicted at once.
pub async fn early_detection_curve(
    threads: &[Thread],
    checkpoints: &[usize],
    predictor: &dyn Predictor,
    workers: usize,
) -> Result<Vec<CurvePoint>, EvalError> {
    validate_checkpoints(checkpoints)?;
    let mut points = Vec::with_capacity(checkpoints.len());
    for &checkpoint in checkpoints {
        let truncated: Vec<Thread> = threads.iter().map(|t| truncate_by_count(t, checkpoint)).collect();
        let results: Vec<(Option<Label>, Result<Label, String>)> =
            futures::stream::iter(truncated.iter().map(|t| async move { (t.claim.label, predictor.predict(t).await) }))
                .buffered(workers.max(1))
                .collect()
                .await;
        let n_aborted = results.iter().filter(|(_, r)| r.is_err()).count();
        let pairs: Vec<(Label, Label)> = results
            .iter()
            .filter_map(|(g, r)| Some(((*g)?, r.clone().ok()?)))
            .collect();
        points.push(CurvePoint {
            checkpoint,
            macro_f1: compute_metrics(&pairs).ok().map(|m| m.macro_f1),
            n_aborted,
        });
    }
    Ok(points)
}

pub fn write_curve_csv(points: &[CurvePoint], w: impl Write) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["checkpoint", "macro_f1", "n_aborted"])?;
    for p in points {
        out.write_record([
            p.checkpoint.to_string(),
            p.macro_f1.map(|v| format!("{v:.6}")).unwrap_or_default(),
            p.n_aborted.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
