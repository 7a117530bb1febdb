//! Description fidelity: cosine between signal texts and the ground-truth
//! summary under a pluggable sentence embedder.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::trace::{Signal, SignalVector};

pub const DEFAULT_EMBEDDING_MODEL: &str = "BAAI/bge-base-en-v1.5";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("embedder unavailable: {0}")]
pub struct EmbedError(pub String);

/// Text to fixed-dimension vectors, one per input, in input order.
pub trait Embedder: Send + Sync {
    fn name(&self) -> String;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Cosine of two vectors after unit normalization; 0 if either is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| (x / na) * (y / nb)).sum();
    dot.clamp(-1.0, 1.0)
}

/// Offline bag-of-features embedder: lowercased words and word bigrams
/// hashed into signed buckets. Lexical only.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    pub dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder { dim: 512 }
    }
}

impl HashingEmbedder {
    fn vector(&self, text: &str) -> Vec<f64> {
        let lower = text.to_lowercase();
        let words: Vec<&str> = lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .collect();
        let mut v = vec![0.0; self.dim];
        let mut add = |feature: &str, weight: f64| {
            let h = Sha256::digest(feature.as_bytes());
            let idx = u64::from_le_bytes(h[..8].try_into().unwrap()) as usize % self.dim;
            let sign = if h[8] & 1 == 0 { 1.0 } else { -1.0 };
            v[idx] += sign * weight;
        };
        for w in &words {
            add(w, 1.0);
        }
        for pair in words.windows(2) {
            add(&format!("{} {}", pair[0], pair[1]), 0.5);
        }
        normalize(v)
    }
}

impl Embedder for HashingEmbedder {
    fn name(&self) -> String {
        format!("hashing-{}", self.dim)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }
}

/// OpenAI-compatible `POST {base}/embeddings` client.
pub struct HttpEmbedder {
    url: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(base_url: &str, model: &str, api_key: Option<String>, timeout: Duration) -> HttpEmbedder {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let base = base_url.trim_end_matches('/');
        let url = if base.ends_with("/embeddings") { base.to_string() } else { format!("{base}/embeddings") };
        HttpEmbedder {
            url,
            model: model.to_string(),
            api_key,
            agent,
        }
    }
}

pub fn parse_embedding_response(body: &Value, expected: usize) -> Result<Vec<Vec<f64>>, EmbedError> {
    let data = body["data"].as_array().ok_or_else(|| EmbedError("response has no data array".into()))?;
    let mut out: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
    for (i, item) in data.iter().enumerate() {
        let index = item["index"].as_u64().map_or(i, |x| x as usize);
        let vector = item["embedding"]
            .as_array()
            .ok_or_else(|| EmbedError("item has no embedding".into()))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| EmbedError("non-numeric embedding".into())))
            .collect::<Result<Vec<f64>, _>>()?;
        out.push((index, vector));
    }
    if out.len() != expected {
        return Err(EmbedError(format!("expected {expected} embeddings, got {}", out.len())));
    }
    out.sort_by_key(|p| p.0);
    Ok(out.into_iter().map(|p| p.1).collect())
}

impl Embedder for HttpEmbedder {
    fn name(&self) -> String {
        self.model.clone()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(json!({"model": self.model, "input": texts}))
            .map_err(|e| EmbedError(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| EmbedError(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(EmbedError(format!("HTTP {status}")));
        }
        let body: Value = serde_json::from_str(&text).map_err(|e| EmbedError(e.to_string()))?;
        parse_embedding_response(&body, texts.len())
    }
}

/// How fired signal texts combine into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineMode {
    /// One embedding of the fired texts joined in PCA, IC, IR order.
    #[default]
    Concatenate,
    /// Mean of the per-signal cosines over fired signals.
    MeanOfFired,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScores {
    pub pca: f64,
    pub ic: f64,
    pub ir: f64,
    pub combined: f64,
}

impl SimilarityScores {
    pub fn get(&self, s: Signal) -> f64 {
        match s {
            Signal::Pca => self.pca,
            Signal::Ic => self.ic,
            Signal::Ir => self.ir,
            Signal::Union | Signal::Majority => self.combined,
        }
    }
}

fn fired_text(signals: &SignalVector, s: Signal) -> Option<&str> {
    let t = signals.text(s).trim();
    (signals.fires(s) && !t.is_empty()).then_some(t)
}

pub fn combined_text(signals: &SignalVector) -> String {
    Signal::BASE
        .iter()
        .filter_map(|&s| fired_text(signals, s))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Every text whose embedding `similarity_from_table` will ask for.
pub fn similarity_texts(signals: &SignalVector, summary: &str) -> Vec<String> {
    let mut out: Vec<String> = Signal::BASE
        .iter()
        .filter_map(|&s| fired_text(signals, s).map(str::to_string))
        .collect();
    if !out.is_empty() {
        out.push(combined_text(signals));
        out.push(summary.to_string());
    }
    out
}

/// Embeddings keyed by text; each distinct text is embedded once.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn build(embedder: &dyn Embedder, texts: impl IntoIterator<Item = String>, batch: usize) -> Result<EmbeddingTable, EmbedError> {
        let mut pending: Vec<String> = texts.into_iter().collect();
        pending.sort();
        pending.dedup();
        let mut vectors = HashMap::with_capacity(pending.len());
        for chunk in pending.chunks(batch.max(1)) {
            let got = embedder.embed(chunk)?;
            if got.len() != chunk.len() {
                return Err(EmbedError(format!("expected {} embeddings, got {}", chunk.len(), got.len())));
            }
            for (t, v) in chunk.iter().zip(got) {
                vectors.insert(t.clone(), normalize(v));
            }
        }
        Ok(EmbeddingTable { vectors })
    }

    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        match (self.vectors.get(a), self.vectors.get(b)) {
            (Some(x), Some(y)) => cosine(x, y),
            _ => 0.0,
        }
    }
}

pub fn similarity_from_table(signals: &SignalVector, summary: &str, table: &EmbeddingTable, mode: CombineMode) -> SimilarityScores {
    let per = |s: Signal| fired_text(signals, s).map_or(0.0, |t| table.cosine(t, summary));
    let (pca, ic, ir) = (per(Signal::Pca), per(Signal::Ic), per(Signal::Ir));
    let fired: Vec<f64> = Signal::BASE
        .iter()
        .filter(|&&s| fired_text(signals, s).is_some())
        .map(|&s| per(s))
        .collect();
    let combined = if fired.is_empty() {
        0.0
    } else {
        match mode {
            CombineMode::Concatenate => table.cosine(&combined_text(signals), summary),
            CombineMode::MeanOfFired => fired.iter().sum::<f64>() / fired.len() as f64,
        }
    };
    SimilarityScores { pca, ic, ir, combined }
}

/// Per-signal and combined cosine against `summary`; exactly 0 for signals
/// that did not fire.
pub fn description_similarity(
    signals: &SignalVector,
    summary: &str,
    embedder: &dyn Embedder,
    mode: CombineMode,
) -> Result<SimilarityScores, EmbedError> {
    let table = EmbeddingTable::build(embedder, similarity_texts(signals, summary), 32)?;
    Ok(similarity_from_table(signals, summary, &table, mode))
}
