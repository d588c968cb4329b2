//! Narrative corpus records: generation against a chat-completion API,
//! resumable JSONL persistence, and ingestion of pre-existing corpora.

mod http;
pub mod mock;

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AuditError, Result};
use crate::prompts::PowerCondition;
use crate::storage::{self, RowError};

pub use http::{run_generation, ChatClient, GenerationSummary};

/// Default environment variable holding the API bearer token.
pub const DEFAULT_API_KEY_VAR: &str = "NARRATIVE_AUDIT_API_KEY";

/// One generated story with full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrativeRecord {
    /// Deterministic 128-bit hex id over (model, prompt text, sample index);
    /// re-running a plan never duplicates records.
    pub id: String,
    pub model: String,
    pub scenario_id: String,
    pub power_condition: PowerCondition,
    pub input_country: String,
    pub prompt_text: String,
    pub story_text: String,
    pub created_at: DateTime<Utc>,
    /// Decoding parameters passed through to the API, recorded as-is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<serde_json::Value>,
}

/// 128-bit record id: SHA-256 over length-framed (model, prompt, sample index).
pub fn record_id(model: &str, prompt_text: &str, sample_index: u32) -> String {
    let mut hasher = Sha256::new();
    for field in [model, prompt_text] {
        hasher.update((field.len() as u64).to_le_bytes());
        hasher.update(field.as_bytes());
    }
    hasher.update(sample_index.to_le_bytes());
    let digest = hasher.finalize();
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

fn default_api_key_var() -> String {
    DEFAULT_API_KEY_VAR.to_string()
}

fn default_rate_window() -> Duration {
    Duration::from_secs(60)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryConfig {
    pub max_attempts: u32,
    /// Backoff before retry k is `base_backoff * 2^(k-1)`, jittered.
    #[serde(with = "duration_millis")]
    pub base_backoff: Duration,
    /// Fraction of the delay randomized away, in [0, 1].
    pub jitter: f64,
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig {
            max_attempts: 3,
            base_backoff: Duration::from_millis(500),
            jitter: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default = "default_api_key_var")]
    pub api_key_source: String,
    pub max_in_flight: usize,
    pub requests_per_minute: u32,
    #[serde(default)]
    pub retry: RetryConfig,
    #[serde(with = "duration_millis", default = "http::default_timeout")]
    pub timeout: Duration,
    /// Length of the sliding rate window. 60 s in production; shrunk only
    /// by tests that need to exercise the limiter quickly.
    #[serde(with = "duration_millis", default = "default_rate_window")]
    pub rate_window: Duration,
    /// Decoding parameters merged verbatim into each API request body and
    /// recorded into each record. No defaults are asserted here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<serde_json::Value>,
}

impl ClientConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        ClientConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key_source: default_api_key_var(),
            max_in_flight: 4,
            requests_per_minute: 60,
            retry: RetryConfig::default(),
            timeout: http::default_timeout(),
            rate_window: default_rate_window(),
            sampling: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_in_flight == 0 {
            return Err(AuditError::Config("max_in_flight must be >= 1".into()));
        }
        if self.requests_per_minute == 0 {
            return Err(AuditError::Config("requests_per_minute must be >= 1".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(AuditError::Config("retry.max_attempts must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.retry.jitter) {
            return Err(AuditError::Config("retry.jitter must be in [0, 1]".into()));
        }
        Ok(())
    }
}

mod duration_millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// Corpus file layouts accepted by [`ingest_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    /// This toolkit's own JSONL schema ([`NarrativeRecord`] per line).
    Native,
    /// The US-anchored upstream study's JSONL schema.
    UpstreamStudy1,
}

impl std::str::FromStr for CorpusFormat {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(CorpusFormat::Native),
            "upstream" | "upstream_study1" => Ok(CorpusFormat::UpstreamStudy1),
            other => Err(AuditError::InvalidInput(format!(
                "unknown corpus format {other:?} (expected native|upstream)"
            ))),
        }
    }
}

/// One row of the upstream US-anchored corpus.
#[derive(Debug, Deserialize)]
struct UpstreamRow {
    model: String,
    prompt_id: String,
    power: String,
    prompt: String,
    response: String,
    #[serde(default)]
    country: Option<String>,
}

/// Ingestion result: normalized records plus per-row failures with line
/// numbers. Unmappable rows never abort the whole file.
#[derive(Debug)]
pub struct IngestOutcome {
    pub records: Vec<NarrativeRecord>,
    pub errors: Vec<RowError>,
}

/// Reads a corpus file and normalizes it to [`NarrativeRecord`]s.
pub fn ingest_corpus(path: &Path, format: CorpusFormat) -> Result<IngestOutcome> {
    match format {
        CorpusFormat::Native => {
            let (records, mut errors): (Vec<NarrativeRecord>, _) =
                storage::read_jsonl_lenient(path)?;
            let mut kept = Vec::with_capacity(records.len());
            for record in records {
                if record.story_text.trim().is_empty() {
                    errors.push(RowError {
                        line: 0,
                        message: format!("record {} has empty story_text", record.id),
                    });
                } else {
                    kept.push(record);
                }
            }
            Ok(IngestOutcome { records: kept, errors })
        }
        CorpusFormat::UpstreamStudy1 => {
            let (rows, mut errors): (Vec<UpstreamRow>, _) = storage::read_jsonl_lenient(path)?;
            let mut records = Vec::with_capacity(rows.len());
            let mut sample_counters: HashMap<(String, String), u32> = HashMap::new();
            for row in rows {
                let condition = match row.power.as_str() {
                    "neutral" => PowerCondition::Neutral,
                    "laden" => PowerCondition::Laden,
                    other => {
                        errors.push(RowError {
                            line: 0,
                            message: format!("unknown power condition {other:?}"),
                        });
                        continue;
                    }
                };
                if row.response.trim().is_empty() {
                    errors.push(RowError {
                        line: 0,
                        message: format!("row for prompt {:?} has no story text", row.prompt_id),
                    });
                    continue;
                }
                let counter = sample_counters
                    .entry((row.model.clone(), row.prompt.clone()))
                    .or_insert(0);
                let sample_index = *counter;
                *counter += 1;
                records.push(NarrativeRecord {
                    id: record_id(&row.model, &row.prompt, sample_index),
                    model: row.model,
                    scenario_id: row.prompt_id,
                    power_condition: condition,
                    input_country: row.country.unwrap_or_else(|| "USA".to_string()),
                    prompt_text: row.prompt,
                    story_text: row.response,
                    created_at: Utc.timestamp_opt(0, 0).unwrap(),
                    sampling: None,
                });
            }
            Ok(IngestOutcome { records, errors })
        }
    }
}

/// Reads an existing native corpus, returning its record ids (for resume).
pub fn existing_record_ids(path: &Path) -> Result<std::collections::HashSet<String>> {
    if !path.exists() {
        return Ok(Default::default());
    }
    let (records, _): (Vec<NarrativeRecord>, _) = storage::read_jsonl_lenient(path)?;
    Ok(records.into_iter().map(|r| r.id).collect())
}
