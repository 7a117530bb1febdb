//! The single run configuration that drives every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::endpoint::Backoff;
use crate::harness::EndpointProfile;
use crate::metrics::{CombineMode, DEFAULT_EMBEDDING_MODEL};
use crate::model::Variant;
use crate::trace::LabelBands;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderBackend {
    /// Offline lexical hashing embedder.
    #[default]
    Hashing,
    /// OpenAI-compatible `/embeddings` service.
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedderConfig {
    #[serde(default)]
    pub backend: EmbedderBackend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default = "default_embedding_model")]
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub combine: CombineMode,
}

fn default_embedding_model() -> String {
    DEFAULT_EMBEDDING_MODEL.to_string()
}
fn default_batch() -> usize {
    32
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            backend: EmbedderBackend::default(),
            url: None,
            model: default_embedding_model(),
            api_key_env: None,
            batch: default_batch(),
            combine: CombineMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationConfig {
    pub locator: String,
    pub model_id: String,
    #[serde(default = "default_attempts")]
    pub attempts: u32,
    #[serde(default = "default_transport_retries")]
    pub transport_retries: u32,
    #[serde(default)]
    pub backoff: Backoff,
    #[serde(default = "default_mutation_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_mutation_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

fn default_attempts() -> u32 {
    3
}
fn default_transport_retries() -> u32 {
    5
}
fn default_mutation_tokens() -> u32 {
    4096
}
fn default_mutation_concurrency() -> usize {
    4
}
fn default_timeout_s() -> f64 {
    300.0
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            locator: "auditor:mutator".into(),
            model_id: "auditor-mutator".into(),
            attempts: default_attempts(),
            transport_retries: default_transport_retries(),
            backoff: Backoff::default(),
            max_tokens: default_mutation_tokens(),
            concurrency: default_mutation_concurrency(),
            timeout_s: default_timeout_s(),
            api_key_env: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Source directory or candidate archive.
    pub corpus: PathBuf,
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Keep only the first N accepted samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_limit: Option<usize>,
    /// Restrict elicitation to these model ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<Variant>>,
    #[serde(default)]
    pub bands: LabelBands,
    #[serde(default)]
    pub embedder: EmbedderConfig,
    #[serde(default)]
    pub mutation: MutationConfig,
    #[serde(default)]
    pub endpoints: Vec<EndpointProfile>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn new(corpus: impl Into<PathBuf>, out: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            corpus: corpus.into(),
            out: out.into(),
            seed: 0,
            sample_limit: None,
            models: None,
            variants: None,
            bands: LabelBands::default(),
            embedder: EmbedderConfig::default(),
            mutation: MutationConfig::default(),
            endpoints: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut c = RunConfig::from_toml(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.corpus, &mut c.out] {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !(0.0 < self.bands.medium && self.bands.medium < self.bands.high && self.bands.high <= 1.0) {
            return Err(ConfigError::Invalid("label bands must satisfy 0 < medium < high <= 1".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for e in &self.endpoints {
            e.check().map_err(ConfigError::Invalid)?;
            if !ids.insert(&e.model_id) {
                return Err(ConfigError::Invalid(format!("duplicate model_id {}", e.model_id)));
            }
        }
        Ok(())
    }

    /// Endpoints selected by `models`, in config order.
    pub fn selected_endpoints(&self) -> Result<Vec<EndpointProfile>, ConfigError> {
        match &self.models {
            None => Ok(self.endpoints.clone()),
            Some(names) => names
                .iter()
                .map(|n| {
                    self.endpoints
                        .iter()
                        .find(|e| &e.model_id == n)
                        .cloned()
                        .ok_or_else(|| ConfigError::Invalid(format!("no endpoint with model_id {n}")))
                })
                .collect(),
        }
    }

    /// Hash of everything that defines an elicitation experiment: seed,
    /// label bands and each endpoint's identity and sampling parameters.
    /// Selection filters and concurrency are excluded.
    pub fn experiment_hash(&self) -> String {
        let endpoints: Vec<_> = self
            .endpoints
            .iter()
            .map(|e| (&e.locator, &e.model_id, e.max_tokens, e.temperature, e.retry_limit))
            .collect();
        let canonical = serde_json::json!({
            "seed": self.seed,
            "bands": self.bands,
            "endpoints": endpoints,
        });
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }
}
