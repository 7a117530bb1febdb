//! Append-only trace store: `traces.jsonl`, `failures.jsonl` and an
//! in-memory key index rebuilt on open.
//!
//! A record is one line. A line without its terminating newline is a torn
//! write; opening the store cuts it off, so its key counts as not done.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::Variant;
use crate::perturb::PerturbationRecord;
use crate::trace::ReasoningTrace;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunKey {
    pub model_id: String,
    pub variant: Variant,
    pub sample_id: String,
}

impl fmt::Display for RunKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.model_id, self.variant, self.sample_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTrace {
    pub key: RunKey,
    pub prompt_sha256: String,
    pub trace: ReasoningTrace,
    /// Input bundle, reference assertion and perturbation provenance.
    pub provenance: PerturbationRecord,
    pub raw_output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureCause {
    LeakAbort,
    ParseFailure,
    ValidationFailure,
    TransientExhausted,
    PermanentRefusal,
    EndpointFatal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub key: RunKey,
    pub prompt_sha256: Option<String>,
    pub cause: FailureCause,
    pub detail: String,
    pub raw_output: Option<String>,
    pub attempts: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: unreadable record")]
    Corrupt { path: PathBuf, line: usize },
    #[error("DUPLICATE_KEY: {0}")]
    DuplicateKey(RunKey),
    #[error("config hash mismatch: store was created with {stored}, run uses {current}")]
    ConfigMismatch { stored: String, current: String },
    #[error("prompt drift on {0}: stored prompt hash differs from the rendered prompt")]
    PromptDrift(RunKey),
}

#[derive(Deserialize)]
struct KeyOnly {
    key: RunKey,
    prompt_sha256: Option<String>,
}

#[derive(Deserialize)]
struct FailureKey {
    key: RunKey,
    cause: FailureCause,
}

struct Entry {
    offset: u64,
    len: usize,
    prompt_sha256: String,
}

pub struct TraceStore {
    dir: PathBuf,
    traces: File,
    failures: File,
    traces_len: u64,
    index: HashMap<RunKey, Entry>,
    refused: HashSet<RunKey>,
    failure_count: usize,
}

pub const TRACES_FILE: &str = "traces.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";
pub const MANIFEST_FILE: &str = "store.json";

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Opens `path` for append, drops a torn trailing line, and returns the
/// file with the complete lines it holds.
fn open_log(path: &Path) -> Result<(File, Vec<(u64, String)>), StoreError> {
    let mut file = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)
        .map_err(io_err(path))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(io_err(path))?;
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    if complete < bytes.len() {
        file.set_len(complete as u64).map_err(io_err(path))?;
    }
    file.seek(SeekFrom::End(0)).map_err(io_err(path))?;
    let mut lines = Vec::new();
    let mut offset = 0u64;
    for chunk in bytes[..complete].split_inclusive(|&b| b == b'\n') {
        let line = String::from_utf8_lossy(chunk).trim_end().to_string();
        if !line.is_empty() {
            lines.push((offset, line));
        }
        offset += chunk.len() as u64;
    }
    Ok((file, lines))
}

impl TraceStore {
    pub fn open(dir: &Path) -> Result<TraceStore, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let tpath = dir.join(TRACES_FILE);
        let fpath = dir.join(FAILURES_FILE);
        let (traces, tlines) = open_log(&tpath)?;
        let (failures, flines) = open_log(&fpath)?;
        let mut index = HashMap::new();
        for (i, (offset, line)) in tlines.iter().enumerate() {
            let k: KeyOnly = serde_json::from_str(line).map_err(|_| StoreError::Corrupt {
                path: tpath.clone(),
                line: i + 1,
            })?;
            index.entry(k.key).or_insert(Entry {
                offset: *offset,
                len: line.len(),
                prompt_sha256: k.prompt_sha256.unwrap_or_default(),
            });
        }
        let mut refused = HashSet::new();
        for (i, (_, line)) in flines.iter().enumerate() {
            let f: FailureKey = serde_json::from_str(line).map_err(|_| StoreError::Corrupt {
                path: fpath.clone(),
                line: i + 1,
            })?;
            if f.cause == FailureCause::PermanentRefusal {
                refused.insert(f.key);
            }
        }
        let traces_len = traces.metadata().map_err(io_err(&tpath))?.len();
        Ok(TraceStore {
            dir: dir.to_path_buf(),
            traces,
            failures,
            traces_len,
            index,
            refused,
            failure_count: flines.len(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Records `config_hash` on first use and rejects a different one later.
    pub fn bind_config(&self, config_hash: &str) -> Result<(), StoreError> {
        let path = self.dir.join(MANIFEST_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => {
                let v: serde_json::Value = serde_json::from_str(&text).map_err(|_| StoreError::Corrupt {
                    path: path.clone(),
                    line: 1,
                })?;
                let stored = v["config_hash"].as_str().unwrap_or_default().to_string();
                if stored != config_hash {
                    return Err(StoreError::ConfigMismatch {
                        stored,
                        current: config_hash.to_string(),
                    });
                }
                Ok(())
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                let body = serde_json::json!({ "config_hash": config_hash });
                fs::write(&path, body.to_string()).map_err(io_err(&path))
            }
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    pub fn contains(&self, key: &RunKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn is_refused(&self, key: &RunKey) -> bool {
        self.refused.contains(key)
    }

    pub fn prompt_sha256(&self, key: &RunKey) -> Option<&str> {
        self.index.get(key).map(|e| e.prompt_sha256.as_str())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn failure_count(&self) -> usize {
        self.failure_count
    }

    pub fn keys(&self) -> impl Iterator<Item = &RunKey> {
        self.index.keys()
    }

    pub fn append_trace(&mut self, record: &StoredTrace) -> Result<(), StoreError> {
        if self.index.contains_key(&record.key) {
            return Err(StoreError::DuplicateKey(record.key.clone()));
        }
        let line = serde_json::to_string(record).expect("stored trace serializes");
        let path = self.dir.join(TRACES_FILE);
        let mut buf = line.clone().into_bytes();
        buf.push(b'\n');
        self.traces.write_all(&buf).map_err(io_err(&path))?;
        self.traces.flush().map_err(io_err(&path))?;
        self.index.insert(
            record.key.clone(),
            Entry {
                offset: self.traces_len,
                len: line.len(),
                prompt_sha256: record.prompt_sha256.clone(),
            },
        );
        self.traces_len += buf.len() as u64;
        Ok(())
    }

    pub fn append_failure(&mut self, record: &FailureRecord) -> Result<(), StoreError> {
        let path = self.dir.join(FAILURES_FILE);
        let mut buf = serde_json::to_vec(record).expect("failure record serializes");
        buf.push(b'\n');
        self.failures.write_all(&buf).map_err(io_err(&path))?;
        self.failures.flush().map_err(io_err(&path))?;
        if record.cause == FailureCause::PermanentRefusal {
            self.refused.insert(record.key.clone());
        }
        self.failure_count += 1;
        Ok(())
    }

    pub fn get(&self, key: &RunKey) -> Result<Option<StoredTrace>, StoreError> {
        let Some(e) = self.index.get(key) else {
            return Ok(None);
        };
        let path = self.dir.join(TRACES_FILE);
        let mut f = File::open(&path).map_err(io_err(&path))?;
        f.seek(SeekFrom::Start(e.offset)).map_err(io_err(&path))?;
        let mut buf = vec![0; e.len];
        f.read_exact(&mut buf).map_err(io_err(&path))?;
        let rec = serde_json::from_slice(&buf).map_err(|_| StoreError::Corrupt { path, line: 0 })?;
        Ok(Some(rec))
    }
}

/// Reads every complete trace record in a store directory.
pub fn read_traces(dir: &Path) -> Result<Vec<StoredTrace>, StoreError> {
    read_log(&dir.join(TRACES_FILE))
}

pub fn read_failures(dir: &Path) -> Result<Vec<FailureRecord>, StoreError> {
    read_log(&dir.join(FAILURES_FILE))
}

fn read_log<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete = text.rfind('\n').map_or(0, |p| p + 1);
    text[..complete]
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|_| StoreError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
            })
        })
        .collect()
}
