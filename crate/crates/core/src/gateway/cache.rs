use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::warn;

use super::{GatewayError, GenerationRequest, Message};

/// One line of the on-disk cache file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key_digest: String,
    pub model_id: String,
    pub temperature: f64,
    pub request_messages: Vec<Message>,
    pub response_text: String,
    pub timestamp: String,
}

/// Hex SHA-256 over model id, temperature and the canonical message list.
pub(crate) fn key_digest(req: &GenerationRequest) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        model_id: &'a str,
        temperature: f64,
        messages: &'a [Message],
    }
    let canonical = serde_json::to_vec(&Key {
        model_id: &req.model_id,
        temperature: req.temperature,
        messages: &req.messages,
    })
    .expect("cache key serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// Response cache keyed by request digest, optionally backed by an
/// append-only JSONL file. The first stored text for a key always wins.
pub struct ResponseCache {
    entries: Mutex<HashMap<String, String>>,
    file: Option<(PathBuf, Mutex<File>)>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self {
            entries: Mutex::new(HashMap::new()),
            file: None,
        }
    }

    /// Loads existing records from `path` (if present) and appends new ones.
    /// Unparseable lines are skipped with a warning.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref().to_path_buf();
        let io = |e: std::io::Error| GatewayError::Cache(format!("{}: {e}", path.display()));
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(rec) => {
                        entries.entry(rec.key_digest).or_insert(rec.response_text);
                    }
                    Err(e) => warn!(line = i + 1, error = %e, "skipping bad cache record"),
                }
            }
        } else if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io)?;
        Ok(Self {
            entries: Mutex::new(entries),
            file: Some((path, Mutex::new(file))),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    /// Stores `text` unless the key is already present, and returns the text
    /// now associated with the key.
    pub(crate) fn insert(
        &self,
        key: String,
        req: &GenerationRequest,
        text: String,
    ) -> Result<String, GatewayError> {
        let mut entries = self.entries.lock().unwrap();
        if let Some(existing) = entries.get(&key) {
            return Ok(existing.clone());
        }
        if let Some((path, file)) = &self.file {
            let record = CacheRecord {
                key_digest: key.clone(),
                model_id: req.model_id.clone(),
                temperature: req.temperature,
                request_messages: req.messages.clone(),
                response_text: text.clone(),
                timestamp: chrono::Utc::now().to_rfc3339(),
            };
            let mut line = serde_json::to_string(&record)
                .map_err(|e| GatewayError::Cache(e.to_string()))?;
            line.push('\n');
            let mut f = file.lock().unwrap();
            f.write_all(line.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| GatewayError::Cache(format!("{}: {e}", path.display())))?;
        }
        entries.insert(key, text.clone());
        Ok(text)
    }
}
