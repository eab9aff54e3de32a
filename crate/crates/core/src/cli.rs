//! Command-line entry point: `detect`, `evaluate`, `early`, and `synth`.
//!
//! Every run directory holds `manifest.json`, `transcripts/<claim>.json` and
//! `errors.jsonl`; `evaluate` adds `report.json`/`report.csv` and `early`
//! adds `curve.csv`. Exit codes: 0 all claims completed, 2 some claims
//! aborted, 1 fatal error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use futures::StreamExt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::{info, warn};

use crate::agents::Agents;
use crate::corpus::{read_corpus, synth_fixtures, synth_oracle_rules, write_records};
use crate::debate::{AblationFlags, ClaimAbort, DebateConfig, DebateTranscript, Detector};
use crate::eval::{early_detection_curve, validate_checkpoints, write_curve_csv, ClaimRow, EvalError, EvalReport};
use crate::gateway::{
    Backend, BackendConfig, Gateway, GatewayError, HttpBackend, RateLimiter, ResponseCache, ScriptedBackend,
    ScriptedError,
};
use crate::model::{AgentRole, Locale, Thread};
use crate::opinion::{PromptLibrary, TemplateError, TEMPLATE_VERSION};
use crate::stance::StanceConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("preflight: {0}")]
    Preflight(GatewayError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Scripted(#[from] ScriptedError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> CliError + '_ {
    move |source| CliError::Json {
        path: path.display().to_string(),
        source,
    }
}

/// Everything a run needs. Loaded from `--config` (JSON with these field
/// names), then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub backend: BackendConfig,
    pub stance: StanceConfig,
    pub debate: DebateConfig,
    pub corpus: Option<PathBuf>,
    pub out: PathBuf,
    /// Claims processed concurrently.
    pub workers: usize,
    /// JSONL response cache; defaults to `<out>/cache.jsonl`.
    pub cache: Option<PathBuf>,
    pub seed: u64,
    /// Prompt locale for every claim; per-claim platform locale when unset.
    pub locale: Option<Locale>,
    /// Rules file for the offline scripted backend.
    pub scripted: Option<PathBuf>,
    /// Directory of replacement prompt templates (`en/*.txt`, `zh/*.txt`).
    pub prompts: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: BackendConfig::default(),
            stance: StanceConfig::default(),
            debate: DebateConfig::default(),
            corpus: None,
            out: PathBuf::from("runs/latest"),
            workers: 4,
            cache: None,
            seed: 0,
            locale: None,
            scripted: None,
            prompts: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if self.corpus.is_none() {
            return Err(CliError::Config("no corpus given (--corpus or \"corpus\" in the config file)".into()));
        }
        self.stance.validate().map_err(CliError::Config)?;
        self.debate.ablation.validate().map_err(CliError::Config)?;
        self.backend.validate()?;
        Ok(())
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache.clone().unwrap_or_else(|| self.out.join("cache.jsonl"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationArg {
    None,
    NoStance,
    ForceSub,
    ForceNonsub,
    NoDebate,
}

impl AblationArg {
    pub fn flags(self) -> AblationFlags {
        let mut f = AblationFlags::default();
        match self {
            AblationArg::None => {}
            AblationArg::NoStance => f.skip_stance_separation = true,
            AblationArg::ForceSub => f.force_subjective_prompt = true,
            AblationArg::ForceNonsub => f.force_nonsubjective_prompt = true,
            AblationArg::NoDebate => f.skip_debate = true,
        }
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LocaleArg {
    En,
    Zh,
}

impl From<LocaleArg> for Locale {
    fn from(l: LocaleArg) -> Self {
        match l {
            LocaleArg::En => Locale::En,
            LocaleArg::Zh => Locale::Zh,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSONL corpus of claims with their comment threads.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub backend_url: Option<String>,
    /// Model for every agent without its own override.
    #[arg(long)]
    pub model: Option<String>,
    /// Model for the comment scorer only.
    #[arg(long)]
    pub scorer_model: Option<String>,
    /// Comments kept per stance side.
    #[arg(long)]
    pub k: Option<usize>,
    /// Debate rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replaces every ablation setting from the config file.
    #[arg(long, value_enum)]
    pub ablation: Option<AblationArg>,
    #[arg(long, value_enum)]
    pub locale: Option<LocaleArg>,
    /// Use the offline scripted backend with this rules file.
    #[arg(long)]
    pub scripted: Option<PathBuf>,
    /// Response cache file.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                serde_json::from_str(&text).map_err(json_err(path))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.corpus {
            cfg.corpus = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = &self.backend_url {
            cfg.backend.endpoint_url = v.clone();
        }
        if let Some(v) = &self.model {
            cfg.backend.model_id = v.clone();
        }
        if let Some(v) = &self.scorer_model {
            cfg.backend.role_models.insert(AgentRole::Scorer, v.clone());
        }
        if let Some(v) = self.k {
            cfg.stance.k = v;
        }
        if let Some(v) = self.rounds {
            cfg.debate.max_rounds = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.ablation {
            cfg.debate.ablation = v.flags();
        }
        if let Some(v) = self.locale {
            cfg.locale = Some(v.into());
        }
        if let Some(v) = &self.scripted {
            cfg.scripted = Some(v.clone());
        }
        if let Some(v) = &self.cache {
            cfg.cache = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "stance-debate", version, about = "Claim verification by stance-seeded agent debate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run detection and write one transcript per claim.
    Detect(RunArgs),
    /// Score transcripts against gold labels (running detection if needed).
    Evaluate(RunArgs),
    /// Macro-F1 with threads truncated to each post-count checkpoint.
    Early {
        #[command(flatten)]
        run: RunArgs,
        /// Strictly increasing post counts, e.g. 0,5,10,20,40.
        #[arg(long, required = true, value_delimiter = ',')]
        checkpoints: Vec<usize>,
    },
    /// Write a synthetic corpus and matching scripted rules.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        claims: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Run manifest: enough to re-execute the run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub command: String,
    pub config_digest: String,
    pub effective_config: RunConfig,
    pub corpus_sha256: String,
    pub template_version: String,
    pub template_digests: BTreeMap<String, String>,
    pub seed: u64,
    pub ablation_mode: String,
    pub backend_id: String,
    pub n_claims: usize,
    pub n_completed: usize,
    pub n_aborted: usize,
    pub n_corpus_errors: usize,
    pub started_at: String,
    pub finished_at: String,
}

/// Digest of everything that can change a transcript: backend settings,
/// stance and debate settings, seed, locale, corpus bytes, scripted rules and
/// templates. Paths and worker count are excluded.
pub fn config_digest(
    cfg: &RunConfig,
    corpus_sha256: &str,
    rules_sha256: Option<&str>,
    templates: &BTreeMap<String, String>,
) -> String {
    let canonical = serde_json::json!({
        "backend": cfg.backend,
        "stance": cfg.stance,
        "debate": cfg.debate,
        "seed": cfg.seed,
        "locale": cfg.locale,
        "corpus": corpus_sha256,
        "scripted": rules_sha256,
        "templates": templates,
    });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

/// File name for a claim's transcript; ids with unsafe characters get a hash
/// suffix so distinct ids never collide.
pub fn transcript_file_name(claim_id: &str) -> String {
    let safe: String = claim_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    if safe == claim_id && !safe.starts_with('.') {
        format!("{safe}.json")
    } else {
        let h = hex::encode(Sha256::digest(claim_id.as_bytes()));
        format!("{safe}-{}.json", &h[..8])
    }
}

struct Prepared {
    cfg: RunConfig,
    threads: Vec<Thread>,
    detector: Detector,
    digest: String,
    corpus_sha256: String,
    templates: BTreeMap<String, String>,
    n_corpus_errors: usize,
}

fn sha256_file(path: &Path) -> Result<(Vec<u8>, String), CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let h = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, h))
}

async fn prepare(cfg: RunConfig) -> Result<Prepared, CliError> {
    let corpus_path = cfg.corpus.clone().expect("validated");
    let (bytes, corpus_sha256) = sha256_file(&corpus_path)?;
    let report = read_corpus(&bytes[..]).map_err(io_err(&corpus_path))?;
    for e in &report.errors {
        warn!(line = e.line_no, reason = %e.reason, "skipping corpus line");
    }
    if report.threads.is_empty() {
        return Err(CliError::Config(format!("{}: no valid claims", corpus_path.display())));
    }
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    if !report.errors.is_empty() {
        let p = cfg.out.join("corpus_errors.jsonl");
        let f = fs::File::create(&p).map_err(io_err(&p))?;
        report.write_errors(BufWriter::new(f)).map_err(io_err(&p))?;
    }

    let (backend, rules_sha256): (Arc<dyn Backend>, Option<String>) = match &cfg.scripted {
        Some(path) => {
            let (_, h) = sha256_file(path)?;
            (Arc::new(ScriptedBackend::from_file(path)?), Some(h))
        }
        None => (Arc::new(HttpBackend::from_config(&cfg.backend)?), None),
    };
    let cache = ResponseCache::open(cfg.cache_path())?;
    let mut gateway = Gateway::new(backend)
        .with_retry(cfg.backend.retry_policy())
        .with_cache(cache);
    if let Some(rpm) = cfg.backend.requests_per_minute {
        gateway = gateway.with_rate_limit(RateLimiter::per_minute(rpm));
    }
    gateway
        .ping(cfg.backend.model_for(AgentRole::Judge))
        .await
        .map_err(CliError::Preflight)?;

    let prompts = match &cfg.prompts {
        Some(dir) => PromptLibrary::from_dir(dir)?,
        None => PromptLibrary::builtin(),
    };
    let templates = prompts.digests();
    let digest = config_digest(&cfg, &corpus_sha256, rules_sha256.as_deref(), &templates);
    let agents = Agents::new(Arc::new(gateway), cfg.backend.clone())
        .with_prompts(prompts)
        .with_locale(cfg.locale);
    let detector = Detector {
        agents,
        debate: cfg.debate.clone(),
        stance: cfg.stance.clone(),
        seed: cfg.seed,
    };
    Ok(Prepared {
        threads: report.threads,
        n_corpus_errors: report.errors.len(),
        cfg,
        detector,
        digest,
        corpus_sha256,
        templates,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

type Outcome = Result<DebateTranscript, ClaimAbort>;

async fn run_claims(p: &Prepared) -> Vec<Outcome> {
    let pending: Vec<_> = p.threads.iter().map(|t| p.detector.detect(t)).collect();
    futures::stream::iter(pending).buffered(p.cfg.workers).collect().await
}

fn write_outcomes(p: &Prepared, outcomes: &[Outcome]) -> Result<(), CliError> {
    let dir = p.cfg.out.join("transcripts");
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let errors_path = p.cfg.out.join("errors.jsonl");
    let mut errors = BufWriter::new(fs::File::create(&errors_path).map_err(io_err(&errors_path))?);
    for o in outcomes {
        match o {
            Ok(t) => write_json(&dir.join(transcript_file_name(&t.claim_id)), t)?,
            Err(a) => {
                warn!(claim = %a.claim_id, stage = ?a.stage, error = %a.error, "claim aborted");
                serde_json::to_writer(&mut errors, a).map_err(json_err(&errors_path))?;
                errors.write_all(b"\n").map_err(io_err(&errors_path))?;
            }
        }
    }
    errors.flush().map_err(io_err(&errors_path))
}

fn manifest(p: &Prepared, command: &str, outcomes: &[Outcome], started_at: String) -> Manifest {
    let n_aborted = outcomes.iter().filter(|o| o.is_err()).count();
    Manifest {
        run_id: p.digest[..12].to_string(),
        command: command.to_string(),
        config_digest: p.digest.clone(),
        effective_config: p.cfg.clone(),
        corpus_sha256: p.corpus_sha256.clone(),
        template_version: TEMPLATE_VERSION.to_string(),
        template_digests: p.templates.clone(),
        seed: p.cfg.seed,
        ablation_mode: p.cfg.debate.ablation.mode_label(),
        backend_id: p.detector.agents.gateway().backend_id().to_string(),
        n_claims: outcomes.len(),
        n_completed: outcomes.len() - n_aborted,
        n_aborted,
        n_corpus_errors: p.n_corpus_errors,
        started_at,
        finished_at: now(),
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn exit_code(outcomes: &[Outcome]) -> i32 {
    if outcomes.iter().any(|o| o.is_err()) {
        2
    } else {
        0
    }
}

async fn cmd_detect(args: &RunArgs) -> Result<i32, CliError> {
    let started_at = now();
    let p = prepare(args.resolve()?).await?;
    let outcomes = run_claims(&p).await;
    write_outcomes(&p, &outcomes)?;
    write_json(&p.cfg.out.join("manifest.json"), &manifest(&p, "detect", &outcomes, started_at))?;
    info!(claims = outcomes.len(), out = %p.cfg.out.display(), "detection finished");
    Ok(exit_code(&outcomes))
}

/// Outcomes from an earlier `detect` with the same config digest, in corpus
/// order, or `None` if that run is absent or incomplete.
fn load_outcomes(p: &Prepared) -> Option<Vec<Outcome>> {
    let text = fs::read_to_string(p.cfg.out.join("manifest.json")).ok()?;
    let prev: Manifest = serde_json::from_str(&text).ok()?;
    if prev.config_digest != p.digest {
        return None;
    }
    let mut aborts: BTreeMap<String, ClaimAbort> = BTreeMap::new();
    for line in fs::read_to_string(p.cfg.out.join("errors.jsonl")).ok()?.lines() {
        let a: ClaimAbort = serde_json::from_str(line).ok()?;
        aborts.insert(a.claim_id.clone(), a);
    }
    let dir = p.cfg.out.join("transcripts");
    p.threads
        .iter()
        .map(|t| match aborts.remove(&t.claim.id) {
            Some(a) => Some(Err(a)),
            None => {
                let text = fs::read_to_string(dir.join(transcript_file_name(&t.claim.id))).ok()?;
                serde_json::from_str(&text).ok().map(Ok)
            }
        })
        .collect()
}

async fn cmd_evaluate(args: &RunArgs) -> Result<i32, CliError> {
    let started_at = now();
    let p = prepare(args.resolve()?).await?;
    let outcomes = match load_outcomes(&p) {
        Some(o) => {
            info!("reusing transcripts from an earlier run with the same configuration");
            o
        }
        None => {
            let o = run_claims(&p).await;
            write_outcomes(&p, &o)?;
            o
        }
    };
    let rows: Vec<ClaimRow> = p
        .threads
        .iter()
        .zip(&outcomes)
        .map(|(t, o)| ClaimRow::from_outcome(t.claim.label, o))
        .collect();
    let report = EvalReport::from_rows(rows, p.cfg.debate.ablation.mode_label(), p.digest.clone())?;
    write_json(&p.cfg.out.join("report.json"), &report)?;
    let csv_path = p.cfg.out.join("report.csv");
    report.write_rows_csv(fs::File::create(&csv_path).map_err(io_err(&csv_path))?)?;
    write_json(&p.cfg.out.join("manifest.json"), &manifest(&p, "evaluate", &outcomes, started_at))?;
    println!(
        "ACC {:.4}  Mac-F1 {:.4}  RF1 {:.4}  NF1 {:.4}  ({} scored, {} aborted) [{}]",
        report.metrics.accuracy,
        report.metrics.macro_f1,
        report.metrics.rumor_f1,
        report.metrics.nonrumor_f1,
        report.n_claims,
        report.n_aborted,
        report.ablation_mode
    );
    Ok(exit_code(&outcomes))
}

async fn cmd_early(args: &RunArgs, checkpoints: &[usize]) -> Result<i32, CliError> {
    validate_checkpoints(checkpoints)?;
    let started_at = now();
    let p = prepare(args.resolve()?).await?;
    let points = early_detection_curve(&p.threads, checkpoints, &p.detector, p.cfg.workers).await?;
    let path = p.cfg.out.join("curve.csv");
    write_curve_csv(&points, fs::File::create(&path).map_err(io_err(&path))?)?;
    let mut m = manifest(&p, "early", &[], started_at);
    m.n_claims = p.threads.len();
    write_json(&p.cfg.out.join("manifest.json"), &m)?;
    Ok(if points.iter().any(|pt| pt.n_aborted > 0) { 2 } else { 0 })
}

fn cmd_synth(out: &Path, claims: usize, seed: u64) -> Result<i32, CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let corpus = out.join("corpus.jsonl");
    let f = fs::File::create(&corpus).map_err(io_err(&corpus))?;
    write_records(&synth_fixtures(seed, claims), BufWriter::new(f)).map_err(io_err(&corpus))?;
    write_json(&out.join("rules.json"), &synth_oracle_rules())?;
    println!("{}\n{}", corpus.display(), out.join("rules.json").display());
    Ok(0)
}

/// Runs a parsed command and returns the process exit code.
pub async fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Detect(a) => cmd_detect(a).await,
        Command::Evaluate(a) => cmd_evaluate(a).await,
        Command::Early { run, checkpoints } => cmd_early(run, checkpoints).await,
        Command::Synth { out, claims, seed } => cmd_synth(out, *claims, *seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.json");
        fs::write(
            &cfg_path,
            r#"{"corpus": "a.jsonl", "workers": 2, "stance": {"k": 7}, "debate": {"max_rounds": 3},
                "backend": {"model_id": "m-file"}}"#,
        )
        .unwrap();
        let args = RunArgs {
            config: Some(cfg_path),
            k: Some(5),
            model: Some("m-flag".into()),
            scorer_model: Some("m-score".into()),
            ablation: Some(AblationArg::NoDebate),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.stance.k, 5);
        assert_eq!(cfg.debate.max_rounds, 3);
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.backend.model_id, "m-flag");
        assert_eq!(cfg.backend.model_for(AgentRole::Scorer), "m-score");
        assert_eq!(cfg.backend.model_for(AgentRole::Judge), "m-flag");
        assert_eq!(cfg.debate.ablation.mode_label(), "w/o Debate");
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = RunArgs {
            corpus: Some("x".into()),
            ..Default::default()
        };
        assert!(base.resolve().is_ok());
        assert!(RunArgs::default().resolve().is_err());
        assert!(RunArgs { workers: Some(0), ..base.clone() }.resolve().is_err());
        assert!(RunArgs { k: Some(0), ..base.clone() }.resolve().is_err());
    }

    #[test]
    fn ablation_args_map_to_single_flags() {
        assert_eq!(AblationArg::None.flags(), AblationFlags::default());
        let labels: Vec<String> = [AblationArg::NoStance, AblationArg::ForceSub, AblationArg::ForceNonsub, AblationArg::NoDebate]
            .iter()
            .map(|a| a.flags().mode_label())
            .collect();
        assert_eq!(labels, ["w/o Stance", "w/o Non-Sub", "w/o Sub", "w/o Debate"]);
    }

    #[test]
    fn checkpoint_parsing() {
        let cli = Cli::try_parse_from(["stance-debate", "early", "--checkpoints", "0,5,10"]).unwrap();
        assert!(matches!(cli.command, Command::Early { ref checkpoints, .. } if checkpoints == &[0, 5, 10]));
        assert!(Cli::try_parse_from(["stance-debate", "early", "--checkpoints", "1,x"]).is_err());
        assert!(Cli::try_parse_from(["stance-debate", "early"]).is_err());
    }

    #[test]
    fn transcript_names() {
        assert_eq!(transcript_file_name("tw-001"), "tw-001.json");
        let a = transcript_file_name("a/b");
        let b = transcript_file_name("a?b");
        assert!(a.starts_with("a_b-") && b.starts_with("a_b-"));
        assert_ne!(a, b);
        assert!(!transcript_file_name("..").contains('/'));
    }

    #[test]
    fn digest_ignores_paths_and_workers() {
        let t = BTreeMap::new();
        let a = RunConfig::default();
        let b = RunConfig {
            out: "elsewhere".into(),
            workers: 9,
            corpus: Some("c.jsonl".into()),
            ..RunConfig::default()
        };
        assert_eq!(config_digest(&a, "h", None, &t), config_digest(&b, "h", None, &t));
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(config_digest(&a, "h", None, &t), config_digest(&c, "h", None, &t));
        assert_ne!(config_digest(&a, "h", None, &t), config_digest(&a, "h2", None, &t));
    }
}
