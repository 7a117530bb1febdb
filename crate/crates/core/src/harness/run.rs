//! Matrix execution: render, call, repair, validate, append.
//!
//! Each endpoint gets `concurrency` worker threads pulling from its own
//! queue. Workers send finished cells over a channel to the calling thread,
//! which is the only writer to the store.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};

use super::prompt::{render_blind_prompt, BlindPrompt};
use super::store::{FailureCause, FailureRecord, RunKey, StoreError, StoredTrace, TraceStore};
use crate::endpoint::{Backoff, ChatEndpoint, ChatRequest, EndpointError};
use crate::model::{ArtifactBundle, Variant};
use crate::perturb::{PerturbationRecord, VariantMatrix};
use crate::trace::{repair_raw_output, validate_trace, LabelBands, TraceError, TraceKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointProfile {
    /// `http(s)://…` for a chat-completions service, `auditor:…` for the
    /// offline reference auditor.
    pub locator: String,
    pub model_id: String,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_retry_limit")]
    pub retry_limit: u32,
    #[serde(default)]
    pub backoff: Backoff,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: f64,
    /// Environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

fn default_concurrency() -> usize {
    4
}
fn default_retry_limit() -> u32 {
    5
}
fn default_max_tokens() -> u32 {
    4096
}
fn default_timeout_s() -> f64 {
    300.0
}

impl EndpointProfile {
    pub fn new(locator: &str, model_id: &str) -> EndpointProfile {
        EndpointProfile {
            locator: locator.to_string(),
            model_id: model_id.to_string(),
            concurrency: default_concurrency(),
            retry_limit: default_retry_limit(),
            backoff: Backoff::default(),
            max_tokens: default_max_tokens(),
            temperature: 0.0,
            timeout_s: default_timeout_s(),
            api_key_env: None,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.concurrency == 0 {
            return Err(format!("{}: concurrency must be at least 1", self.model_id));
        }
        if self.temperature != 0.0 {
            return Err(format!("{}: temperature must be 0.0", self.model_id));
        }
        if self.model_id.trim().is_empty() {
            return Err("model_id must not be empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub bands: LabelBands,
    /// Stop accepting results after this many store writes, as if killed.
    pub stop_after: Option<usize>,
    pub variants: Option<Vec<Variant>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub attempted: usize,
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total_cells: usize,
    pub already_stored: usize,
    pub skipped_refused: usize,
    pub attempted: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub leak_aborts: usize,
    pub interrupted: bool,
    pub per_model: BTreeMap<String, ModelSummary>,
    /// Hash over all prompt hashes of the matrix, in key order.
    pub prompt_digest: String,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid endpoint profile: {0}")]
    Profile(String),
    #[error("variant matrix has no BASE record for {0}")]
    MissingBase(String),
}

struct Cell {
    key: RunKey,
    record: PerturbationRecord,
    prompt: Result<BlindPrompt, Vec<String>>,
}

enum Outcome {
    Trace(Box<StoredTrace>),
    Failure(FailureRecord),
}

fn failure(key: &RunKey, prompt: Option<&BlindPrompt>, cause: FailureCause, detail: String, raw: Option<String>, attempts: u32) -> Outcome {
    Outcome::Failure(FailureRecord {
        key: key.clone(),
        prompt_sha256: prompt.map(BlindPrompt::sha256),
        cause,
        detail,
        raw_output: raw,
        attempts,
    })
}

/// One cell end to end, with transport retries and validation re-requests
/// sharing the profile's retry budget.
fn run_cell(cell: Cell, profile: &EndpointProfile, endpoint: &dyn ChatEndpoint, bands: &LabelBands) -> Outcome {
    let prompt = match cell.prompt {
        Ok(p) => p,
        Err(leaks) => {
            return failure(&cell.key, None, FailureCause::LeakAbort, format!("prompt reveals {leaks:?}"), None, 0)
        }
    };
    let request = ChatRequest {
        model_id: profile.model_id.clone(),
        system: prompt.system.clone(),
        user: prompt.user.clone(),
        temperature: profile.temperature,
        max_tokens: profile.max_tokens,
    };
    let tkey = TraceKey {
        sample_id: cell.key.sample_id.clone(),
        variant: cell.key.variant,
        model_id: cell.key.model_id.clone(),
    };
    let mut last: Option<(FailureCause, String, Option<String>)> = None;
    let mut transient_waits = 0;
    for attempt in 0..=profile.retry_limit {
        match endpoint.complete(&request) {
            Err(EndpointError::Transient(e)) => {
                last = Some((FailureCause::TransientExhausted, e, None));
                if attempt < profile.retry_limit {
                    thread::sleep(profile.backoff.delay(transient_waits));
                    transient_waits += 1;
                }
            }
            Err(EndpointError::PermanentRefusal(e)) => {
                return failure(&cell.key, Some(&prompt), FailureCause::PermanentRefusal, e, None, attempt + 1)
            }
            Err(EndpointError::Fatal(e)) => {
                return failure(&cell.key, Some(&prompt), FailureCause::EndpointFatal, e, None, attempt + 1)
            }
            Ok(raw) => {
                let parsed = repair_raw_output(&raw).and_then(|c| validate_trace(&c, &tkey, bands));
                match parsed {
                    Ok(trace) => {
                        return Outcome::Trace(Box::new(StoredTrace {
                            key: cell.key.clone(),
                            prompt_sha256: prompt.sha256(),
                            trace,
                            provenance: cell.record,
                            raw_output: raw,
                        }))
                    }
                    Err(TraceError::ParseFailure(_)) => {
                        last = Some((FailureCause::ParseFailure, "PARSE_FAILURE".into(), Some(raw)))
                    }
                    Err(e) => last = Some((FailureCause::ValidationFailure, e.to_string(), Some(raw))),
                }
            }
        }
    }
    let (cause, detail, raw) = last.expect("at least one attempt");
    failure(&cell.key, Some(&prompt), cause, detail, raw, profile.retry_limit + 1)
}

fn base_bundles(matrix: &VariantMatrix) -> HashMap<&str, &ArtifactBundle> {
    matrix
        .datasets
        .get(&Variant::Base)
        .map(|v| v.iter().map(|r| (r.sample_id.as_str(), &r.bundle)).collect())
        .unwrap_or_default()
}

/// Renders every cell of the matrix for one model, in matrix order.
fn cells_for(
    model_id: &str,
    matrix: &VariantMatrix,
    variants: Option<&[Variant]>,
) -> Result<Vec<Cell>, RunError> {
    let bases = base_bundles(matrix);
    let mut out = Vec::new();
    for (variant, records) in &matrix.datasets {
        if variants.is_some_and(|vs| !vs.contains(variant)) {
            continue;
        }
        for record in records {
            let base = bases
                .get(record.sample_id.as_str())
                .ok_or_else(|| RunError::MissingBase(record.sample_id.clone()))?;
            out.push(Cell {
                key: RunKey {
                    model_id: model_id.to_string(),
                    variant: *variant,
                    sample_id: record.sample_id.clone(),
                },
                prompt: render_blind_prompt(record, base).map_err(|e| e.0),
                record: record.clone(),
            });
        }
    }
    Ok(out)
}

fn digest(hashes: &BTreeMap<RunKey, String>) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for (k, v) in hashes {
        h.update(k.to_string().as_bytes());
        h.update([0]);
        h.update(v.as_bytes());
        h.update(*b"\n");
    }
    hex::encode(h.finalize())
}

/// Runs every cell of `matrix` for every endpoint that is not yet stored.
///
/// Before any call, each stored key's prompt hash is compared with the
/// freshly rendered prompt; a mismatch aborts with `PromptDrift`.
pub fn run_matrix(
    endpoints: &[(EndpointProfile, Arc<dyn ChatEndpoint>)],
    matrix: &VariantMatrix,
    store: &mut TraceStore,
    options: &RunOptions,
) -> Result<RunSummary, RunError> {
    let mut summary = RunSummary::default();
    let mut hashes = BTreeMap::new();
    let mut queues: Vec<VecDeque<Cell>> = Vec::with_capacity(endpoints.len());
    for (profile, _) in endpoints {
        profile.check().map_err(RunError::Profile)?;
        let mut queue = VecDeque::new();
        let model = summary.per_model.entry(profile.model_id.clone()).or_default();
        for cell in cells_for(&profile.model_id, matrix, options.variants.as_deref())? {
            summary.total_cells += 1;
            if let Ok(p) = &cell.prompt {
                hashes.insert(cell.key.clone(), p.sha256());
            }
            if let Some(stored) = store.prompt_sha256(&cell.key) {
                let fresh = cell.prompt.as_ref().map(BlindPrompt::sha256).unwrap_or_default();
                if stored != fresh {
                    return Err(StoreError::PromptDrift(cell.key).into());
                }
                summary.already_stored += 1;
            } else if store.is_refused(&cell.key) {
                summary.skipped_refused += 1;
            } else {
                model.attempted += 1;
                queue.push_back(cell);
            }
        }
        queues.push(queue);
    }
    summary.attempted = queues.iter().map(VecDeque::len).sum();
    summary.prompt_digest = digest(&hashes);

    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Outcome>();
    let mut write_error = None;
    thread::scope(|scope| {
        for ((profile, endpoint), queue) in endpoints.iter().zip(queues) {
            let queue = Arc::new(Mutex::new(queue));
            for _ in 0..profile.concurrency {
                let (queue, tx, stop, endpoint) = (Arc::clone(&queue), tx.clone(), &stop, Arc::clone(endpoint));
                let bands = options.bands;
                scope.spawn(move || loop {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Some(cell) = queue.lock().unwrap().pop_front() else {
                        break;
                    };
                    if tx.send(run_cell(cell, profile, endpoint.as_ref(), &bands)).is_err() {
                        break;
                    }
                });
            }
        }
        drop(tx);
        let mut writes = 0;
        for outcome in rx.iter() {
            if stop.load(Ordering::SeqCst) {
                continue;
            }
            let result = match &outcome {
                Outcome::Trace(t) => store.append_trace(t).map(|_| (true, &t.key.model_id, false)),
                Outcome::Failure(f) => store
                    .append_failure(f)
                    .map(|_| (false, &f.key.model_id, f.cause == FailureCause::LeakAbort)),
            };
            match result {
                Ok((ok, model, leak)) => {
                    let m = summary.per_model.get_mut(model).expect("model registered");
                    if ok {
                        summary.succeeded += 1;
                        m.succeeded += 1;
                    } else {
                        summary.failed += 1;
                        m.failed += 1;
                        summary.leak_aborts += leak as usize;
                    }
                }
                Err(e) => {
                    write_error = Some(e);
                    stop.store(true, Ordering::SeqCst);
                    continue;
                }
            }
            writes += 1;
            if options.stop_after.is_some_and(|n| writes >= n) {
                summary.interrupted = true;
                stop.store(true, Ordering::SeqCst);
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }
    Ok(summary)
}
