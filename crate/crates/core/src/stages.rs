//! Stage orchestration: curate, perturb, elicit, evaluate, report.
//!
//! Each stage reads the previous stage's archives under the output root,
//! writes its own directory, and finishes with `summary.json`. Everything
//! except `summary.json` (which carries timings) is byte-identical across
//! reruns on unchanged inputs; elicit is key-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::auditor::{AuditorEndpoint, AuditorProfile};
use crate::config::{ConfigError, EmbedderBackend, RunConfig};
use crate::corpus::{curate, load_candidates, CurationVerdict};
use crate::endpoint::{ChatEndpoint, HttpEndpoint};
use crate::harness::store::{read_traces, FAILURES_FILE, TRACES_FILE};
use crate::harness::{run_matrix, EndpointProfile, RunError, RunOptions, StoreError, TraceStore};
use crate::jsonl::{self, JsonlError};
use crate::metrics::similarity::similarity_texts;
use crate::metrics::{
    compute_report, evaluation_records, write_csv, EmbeddingTable, Embedder, EvaluationRecord, HashingEmbedder,
    HttpEmbedder, MetricError, MetricRow, SimilaritySource,
};
use crate::model::{ArtifactBundle, Variant};
use crate::perturb::{
    assemble_variant_matrix, mutate_with_retry, plan_assignments, review_queue, MatrixError, MutationFailure,
    MutationPlan, MutationSettings, PerturbationRecord, VariantMatrix,
};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Curate,
    Perturb,
    Elicit,
    Evaluate,
    Report,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Curate => "curate",
            Stage::Perturb => "perturb",
            Stage::Elicit => "elicit",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

/// Where each stage keeps its files.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn dir(&self, stage: Stage) -> PathBuf {
        self.root.join(stage.as_str())
    }
    pub fn accepted(&self) -> PathBuf {
        self.dir(Stage::Curate).join("accepted.jsonl")
    }
    pub fn verdicts(&self) -> PathBuf {
        self.dir(Stage::Curate).join("verdicts.jsonl")
    }
    pub fn matrix_files(&self) -> Vec<PathBuf> {
        Variant::ALL
            .iter()
            .map(|v| self.dir(Stage::Perturb).join(VariantMatrix::file_name(*v)))
            .collect()
    }
    pub fn traces(&self) -> PathBuf {
        self.dir(Stage::Elicit).join(TRACES_FILE)
    }
    pub fn records(&self) -> PathBuf {
        self.dir(Stage::Evaluate).join("records.jsonl")
    }
    pub fn metrics_jsonl(&self) -> PathBuf {
        self.dir(Stage::Evaluate).join("metrics.jsonl")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("missing prerequisite archives: {0:?}")]
    MissingPrerequisite(Vec<PathBuf>),
    #[error("{0} already holds a trace store; pass --resume to continue it")]
    StoreExists(PathBuf),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Archive(#[from] JsonlError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl StageError {
    pub fn kind(&self) -> &'static str {
        match self {
            StageError::MissingPrerequisite(_) => "MISSING_PREREQUISITE",
            StageError::StoreExists(_) => "STORE_EXISTS",
            StageError::Config(_) => "CONFIG",
            StageError::Archive(_) => "ARCHIVE",
            StageError::Matrix(_) => "MATRIX_INCOMPLETE",
            StageError::Store(StoreError::ConfigMismatch { .. }) => "CONFIG_MISMATCH",
            StageError::Store(StoreError::PromptDrift(_)) => "PROMPT_DRIFT",
            StageError::Store(_) => "STORE",
            StageError::Run(RunError::Store(StoreError::PromptDrift(_))) => "PROMPT_DRIFT",
            StageError::Run(_) => "RUN",
            StageError::Metric(_) => "METRIC",
            StageError::Output { .. } => "OUTPUT",
        }
    }

    /// Machine-readable failure summary.
    pub fn to_json(&self, stage: Stage) -> Value {
        let mut v = json!({
            "stage": stage.as_str(),
            "status": "failed",
            "error": self.kind(),
            "message": self.to_string(),
        });
        match self {
            StageError::MissingPrerequisite(paths) => {
                v["missing"] = json!(paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
            }
            StageError::Matrix(m) => {
                v["missing"] = json!(m.missing.iter().map(|(s, var)| format!("{s}/{var}")).collect::<Vec<_>>());
            }
            _ => {}
        }
        v
    }
}

fn output_err(path: &Path) -> impl FnOnce(std::io::Error) -> StageError + '_ {
    move |e| StageError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub resume: bool,
    pub models: Option<Vec<String>>,
    pub variants: Option<Vec<Variant>>,
    pub limit: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Applies the overrides and returns them as recorded strings.
    pub fn apply(&self, config: &mut RunConfig) -> BTreeMap<String, String> {
        let mut rec = BTreeMap::new();
        if self.resume {
            rec.insert("resume".into(), "true".into());
        }
        if let Some(m) = &self.models {
            config.models = Some(m.clone());
            rec.insert("models".into(), m.join(","));
        }
        if let Some(v) = &self.variants {
            config.variants = Some(v.clone());
            rec.insert("variants".into(), v.iter().map(|x| x.as_str()).collect::<Vec<_>>().join(","));
        }
        if let Some(l) = self.limit {
            config.sample_limit = Some(l);
            rec.insert("limit".into(), l.to_string());
        }
        if let Some(s) = self.seed {
            config.seed = s;
            rec.insert("seed".into(), s.to_string());
        }
        if let Some(o) = &self.out {
            config.out = o.clone();
            rec.insert("out".into(), o.display().to_string());
        }
        rec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: Stage,
    pub status: String,
    pub counts: BTreeMap<String, usize>,
    pub overrides: BTreeMap<String, String>,
    pub duration_ms: u64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

fn require(paths: &[PathBuf]) -> Result<(), StageError> {
    let missing: Vec<PathBuf> = paths.iter().filter(|p| !p.exists()).cloned().collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(StageError::MissingPrerequisite(missing))
    }
}

fn finish(
    layout: &Layout,
    stage: Stage,
    started: Instant,
    counts: BTreeMap<String, usize>,
    overrides: BTreeMap<String, String>,
    details: Value,
) -> Result<StageSummary, StageError> {
    let summary = StageSummary {
        stage,
        status: "ok".into(),
        counts,
        overrides,
        duration_ms: started.elapsed().as_millis() as u64,
        details,
    };
    let path = layout.dir(stage).join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&path, text + "\n").map_err(output_err(&path))?;
    Ok(summary)
}

fn make_dir(layout: &Layout, stage: Stage) -> Result<PathBuf, StageError> {
    let dir = layout.dir(stage);
    std::fs::create_dir_all(&dir).map_err(output_err(&dir))?;
    Ok(dir)
}

fn counts<const N: usize>(pairs: [(&str, usize); N]) -> BTreeMap<String, usize> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn stage_curate(config: &RunConfig, overrides: BTreeMap<String, String>) -> Result<StageSummary, StageError> {
    let started = Instant::now();
    let layout = Layout { root: config.out.clone() };
    require(std::slice::from_ref(&config.corpus))?;
    let candidates = load_candidates(&config.corpus)?;
    let (accepted, verdicts): (Vec<ArtifactBundle>, Vec<CurationVerdict>) = curate(&candidates);
    make_dir(&layout, Stage::Curate)?;
    jsonl::write_all(&layout.accepted(), &accepted)?;
    jsonl::write_all(&layout.verdicts(), &verdicts)?;
    let mut rule_counts: BTreeMap<String, usize> = BTreeMap::new();
    for v in &verdicts {
        for r in &v.failed_rules {
            *rule_counts.entry(serde_json::to_value(r).unwrap().as_str().unwrap_or("?").to_string()).or_default() += 1;
        }
    }
    finish(
        &layout,
        Stage::Curate,
        started,
        counts([("candidates", candidates.len()), ("accepted", accepted.len()), ("rejected", candidates.len() - accepted.len())]),
        overrides,
        json!({ "rejections_by_rule": rule_counts }),
    )
}

fn chat_endpoint(
    locator: &str,
    api_key_env: Option<&str>,
    timeout_s: f64,
    auditor: impl FnOnce(AuditorProfile) -> AuditorEndpoint,
) -> Result<Arc<dyn ChatEndpoint>, StageError> {
    if locator.starts_with("auditor:") {
        let profile = AuditorProfile::from_locator(locator).map_err(ConfigError::Invalid)?;
        return Ok(Arc::new(auditor(profile)));
    }
    if !(locator.starts_with("http://") || locator.starts_with("https://")) {
        return Err(ConfigError::Invalid(format!("unsupported endpoint locator `{locator}`")).into());
    }
    let key = api_key_env.and_then(|v| std::env::var(v).ok());
    Ok(Arc::new(HttpEndpoint::new(locator, key, Duration::from_secs_f64(timeout_s))))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MutationFailureRecord {
    plan: MutationPlan,
    failure: MutationFailure,
}

pub fn stage_perturb(config: &RunConfig, overrides: BTreeMap<String, String>) -> Result<StageSummary, StageError> {
    let started = Instant::now();
    let layout = Layout { root: config.out.clone() };
    require(&[layout.accepted()])?;
    let mut accepted: Vec<ArtifactBundle> = jsonl::read_all(&layout.accepted())?;
    if let Some(limit) = config.sample_limit {
        accepted.truncate(limit);
    }
    let ids: Vec<String> = accepted.iter().map(|b| b.sample_id.clone()).collect();
    let by_id: BTreeMap<&str, &ArtifactBundle> = accepted.iter().map(|b| (b.sample_id.as_str(), b)).collect();
    let plans = plan_assignments(&ids, config.seed);

    let m = &config.mutation;
    let endpoint = chat_endpoint(&m.locator, m.api_key_env.as_deref(), m.timeout_s, |profile| {
        let mut e = AuditorEndpoint::new(profile);
        for p in &plans {
            e.add_mutation(by_id[p.sample_id.as_str()], p);
        }
        e
    })?;
    let settings = MutationSettings {
        model_id: m.model_id.clone(),
        max_tokens: m.max_tokens,
        attempts: m.attempts,
        transport_retries: m.transport_retries,
        backoff: m.backoff,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(m.concurrency.max(1))
        .build()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let outcomes: Vec<Result<PerturbationRecord, MutationFailure>> = pool.install(|| {
        plans
            .par_iter()
            .map(|p| mutate_with_retry(endpoint.as_ref(), by_id[p.sample_id.as_str()], p, &settings))
            .collect()
    });
    let mut mutations = Vec::new();
    let mut failures = Vec::new();
    for (plan, outcome) in plans.iter().zip(outcomes) {
        match outcome {
            Ok(r) => mutations.push(r),
            Err(failure) => failures.push(MutationFailureRecord {
                plan: plan.clone(),
                failure,
            }),
        }
    }
    let dir = make_dir(&layout, Stage::Perturb)?;
    jsonl::write_all(&dir.join("mutations.jsonl"), &mutations)?;
    jsonl::write_all(&dir.join("mutation_failures.jsonl"), &failures)?;
    let matrix = assemble_variant_matrix(&accepted, &mutations)?;
    matrix.write(&dir)?;
    let queue = review_queue(&matrix);
    jsonl::write_all(&dir.join("review_queue.jsonl"), &queue)?;
    finish(
        &layout,
        Stage::Perturb,
        started,
        counts([
            ("samples", accepted.len()),
            ("mutation_plans", plans.len()),
            ("mutations_accepted", mutations.len()),
            ("mutation_failures", failures.len()),
            ("matrix_records", matrix.len()),
            ("review_pending", queue.len()),
        ]),
        overrides,
        Value::Null,
    )
}

fn store_in_use(dir: &Path) -> bool {
    [TRACES_FILE, FAILURES_FILE]
        .iter()
        .any(|f| std::fs::metadata(dir.join(f)).is_ok_and(|m| m.len() > 0))
}

pub fn stage_elicit(config: &RunConfig, resume: bool, overrides: BTreeMap<String, String>) -> Result<StageSummary, StageError> {
    let started = Instant::now();
    let layout = Layout { root: config.out.clone() };
    require(&layout.matrix_files())?;
    let mut matrix = VariantMatrix::read(&layout.dir(Stage::Perturb))?;
    if let Some(limit) = config.sample_limit {
        matrix.truncate(limit);
    }
    let dir = layout.dir(Stage::Elicit);
    if !resume && store_in_use(&dir) {
        return Err(StageError::StoreExists(dir));
    }
    let mut store = TraceStore::open(&dir)?;
    store.bind_config(&config.experiment_hash())?;

    let profiles: Vec<EndpointProfile> = config.selected_endpoints()?;
    if profiles.is_empty() {
        return Err(ConfigError::Invalid("no endpoints configured".into()).into());
    }
    let mut endpoints = Vec::with_capacity(profiles.len());
    for p in profiles {
        let e = chat_endpoint(&p.locator, p.api_key_env.as_deref(), p.timeout_s, |profile| {
            AuditorEndpoint::for_matrix(profile, &matrix)
        })?;
        endpoints.push((p, e));
    }
    let options = RunOptions {
        bands: config.bands,
        stop_after: None,
        variants: config.variants.clone(),
    };
    let run = run_matrix(&endpoints, &matrix, &mut store, &options)?;
    finish(
        &layout,
        Stage::Elicit,
        started,
        counts([
            ("total_cells", run.total_cells),
            ("already_stored", run.already_stored),
            ("attempted", run.attempted),
            ("succeeded", run.succeeded),
            ("failed", run.failed),
            ("leak_aborts", run.leak_aborts),
            ("stored_traces", store.len()),
            ("failure_ledger", store.failure_count()),
        ]),
        overrides,
        json!({ "config_hash": config.experiment_hash(), "run": run }),
    )
}

fn embedder_for(config: &RunConfig) -> Result<Box<dyn Embedder>, String> {
    let e = &config.embedder;
    match e.backend {
        EmbedderBackend::Hashing => Ok(Box::new(HashingEmbedder::default())),
        EmbedderBackend::Http => {
            let url = e.url.as_deref().ok_or("embedder.url is not set")?;
            let key = e.api_key_env.as_deref().and_then(|v| std::env::var(v).ok());
            Ok(Box::new(HttpEmbedder::new(url, &e.model, key, Duration::from_secs(120))))
        }
    }
}

pub fn stage_evaluate(config: &RunConfig, overrides: BTreeMap<String, String>) -> Result<StageSummary, StageError> {
    let started = Instant::now();
    let layout = Layout { root: config.out.clone() };
    let mut needed = layout.matrix_files();
    needed.push(layout.traces());
    require(&needed)?;
    let matrix = VariantMatrix::read(&layout.dir(Stage::Perturb))?;
    let mut traces = read_traces(&layout.dir(Stage::Elicit))?;
    traces.sort_by(|a, b| a.key.cmp(&b.key));
    let records = evaluation_records(&traces, &matrix)?;
    let dir = make_dir(&layout, Stage::Evaluate)?;
    jsonl::write_all(&layout.records(), &records)?;

    let table = embedder_for(config).and_then(|e| {
        let texts = records.iter().flat_map(|r| similarity_texts(&r.signals, &r.ground_truth_summary));
        EmbeddingTable::build(e.as_ref(), texts, config.embedder.batch)
            .map(|t| (t, e.name()))
            .map_err(|err| err.to_string())
    });
    let (source, embedder_status) = match &table {
        Ok((t, name)) => (SimilaritySource::Table(t, config.embedder.combine), json!({"available": true, "name": name})),
        Err(reason) => (SimilaritySource::Unavailable(reason.clone()), json!({"available": false, "reason": reason})),
    };
    let rows = compute_report(&records, &source);
    jsonl::write_all(&layout.metrics_jsonl(), &rows)?;
    let csv_path = dir.join("metrics.csv");
    write_csv(&csv_path, &rows).map_err(|e| StageError::Output {
        path: csv_path.clone(),
        message: e.to_string(),
    })?;
    let models: std::collections::BTreeSet<&str> = records.iter().map(EvaluationRecord::model).collect();
    finish(
        &layout,
        Stage::Evaluate,
        started,
        counts([("records", records.len()), ("models", models.len()), ("metric_rows", rows.len())]),
        overrides,
        json!({ "embedder": embedder_status, "combine": config.embedder.combine }),
    )
}

/// Report tables and the statistics each one gathers.
pub const REPORT_TABLES: &[(&str, &[&str])] = &[
    ("scores.csv", &["score_mean", "delta_from_base"]),
    ("severity.csv", &["tier_mean", "monotonic", "heavy_subtle_gap", "severity_breakdown_refused"]),
    ("detection.csv", &["detection_rate", "false_positive_floor", "net_gain_pp"]),
    (
        "similarity.csv",
        &[
            "description_similarity",
            "similarity_detected_mean",
            "similarity_missed_mean",
            "similarity_gap",
            "description_similarity_unavailable",
        ],
    ),
    ("calibration.csv", &["confidence_detected_mean", "confidence_missed_mean", "calibration_gap"]),
    ("concordance.csv", &["rank_concordance", "concordance_excluded_both"]),
];

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"))
}

fn top_level<'a>(rows: &'a [MetricRow], model: &str, stat: &str) -> impl Iterator<Item = &'a MetricRow> + 'a {
    let (model, stat) = (model.to_string(), stat.to_string());
    rows.iter()
        .filter(move |r| r.model == model && r.statistic == stat && r.severity.is_none() && r.strategy.is_none())
}

/// Human-readable summary of the metric rows.
pub fn render_markdown(rows: &[MetricRow]) -> String {
    let models: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    let mut s = String::from("# Trace evaluation report\n");
    for model in models {
        let _ = writeln!(s, "\n## {model}\n\n### Detection rate by variant\n");
        let _ = writeln!(s, "| variant | PCA | IC | IR | UNION | MAJORITY | n |\n|---|---|---|---|---|---|---|");
        for v in Variant::ALL {
            let cells: Vec<&MetricRow> = top_level(rows, model, "detection_rate").filter(|r| r.variant == Some(v)).collect();
            if cells.is_empty() {
                continue;
            }
            let get = |sig: &str| fmt(cells.iter().find(|r| r.signal.as_deref() == Some(sig)).and_then(|r| r.value));
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} |",
                v,
                get("PCA"),
                get("IC"),
                get("IR"),
                get("UNION"),
                get("MAJORITY"),
                cells[0].n
            );
        }
        let _ = writeln!(s, "\n### Net gain over the BASE floor (pp)\n\n| variant | signal | gain |\n|---|---|---|");
        for r in top_level(rows, model, "net_gain_pp") {
            let _ = writeln!(s, "| {} | {} | {} |", r.variant.map_or("-".into(), |v| v.to_string()), r.signal.as_deref().unwrap_or("-"), fmt(r.value));
        }
        let _ = writeln!(s, "\n### Severity breakdown (overall score)\n\n| variant | monotonic | HEAVY to SUBTLE gap |\n|---|---|---|");
        for r in top_level(rows, model, "monotonic") {
            let gap = top_level(rows, model, "heavy_subtle_gap").find(|g| g.variant == r.variant).and_then(|g| g.value);
            let _ = writeln!(
                s,
                "| {} | {} | {} |",
                r.variant.map_or("-".into(), |v| v.to_string()),
                r.value == Some(1.0),
                fmt(gap)
            );
        }
        let _ = writeln!(s, "\n### Calibration gap (overall confidence)\n\n| signal | gap | partitions |\n|---|---|---|");
        for r in top_level(rows, model, "calibration_gap") {
            let _ = writeln!(s, "| {} | {} | {} |", r.signal.as_deref().unwrap_or("-"), fmt(r.value), r.note);
        }
        let _ = writeln!(s, "\n### Rank concordance (tau-b)\n\n| variant | strategy | mean | n |\n|---|---|---|---|");
        for r in rows.iter().filter(|r| r.model == model && r.statistic == "rank_concordance") {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} |",
                r.variant.map_or("-".into(), |v| v.to_string()),
                r.strategy.map_or("-".into(), |v| v.to_string()),
                fmt(r.value),
                r.n
            );
        }
        let sims: Vec<&MetricRow> = top_level(rows, model, "similarity_gap").collect();
        if !sims.is_empty() {
            let _ = writeln!(s, "\n### Combined description similarity, detected minus missed\n\n| signal | gap | partitions |\n|---|---|---|");
            for r in sims {
                let _ = writeln!(s, "| {} | {} | {} |", r.signal.as_deref().unwrap_or("-"), fmt(r.value), r.note);
            }
        }
        for r in top_level(rows, model, "description_similarity_unavailable") {
            let _ = writeln!(s, "\nDescription similarity unavailable: {}", r.note);
        }
    }
    s
}

pub fn stage_report(config: &RunConfig, overrides: BTreeMap<String, String>) -> Result<StageSummary, StageError> {
    let started = Instant::now();
    let layout = Layout { root: config.out.clone() };
    require(&[layout.metrics_jsonl()])?;
    let rows: Vec<MetricRow> = jsonl::read_all(&layout.metrics_jsonl())?;
    let dir = make_dir(&layout, Stage::Report)?;
    let mut table_counts = BTreeMap::new();
    for (file, stats) in REPORT_TABLES {
        let subset: Vec<MetricRow> = rows.iter().filter(|r| stats.contains(&r.statistic.as_str())).cloned().collect();
        let path = dir.join(file);
        write_csv(&path, &subset).map_err(|e| StageError::Output {
            path: path.clone(),
            message: e.to_string(),
        })?;
        table_counts.insert(file.to_string(), subset.len());
    }
    let md = dir.join("report.md");
    std::fs::write(&md, render_markdown(&rows)).map_err(output_err(&md))?;
    finish(&layout, Stage::Report, started, table_counts, overrides, Value::Null)
}

/// Runs one stage with the config and CLI overrides.
pub fn run_stage(stage: Stage, mut config: RunConfig, overrides: &Overrides) -> Result<StageSummary, StageError> {
    let recorded = overrides.apply(&mut config);
    config.check()?;
    match stage {
        Stage::Curate => stage_curate(&config, recorded),
        Stage::Perturb => stage_perturb(&config, recorded),
        Stage::Elicit => stage_elicit(&config, overrides.resume, recorded),
        Stage::Evaluate => stage_evaluate(&config, recorded),
        Stage::Report => stage_report(&config, recorded),
    }
}
