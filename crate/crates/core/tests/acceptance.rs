//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails.

use std::collections::{BTreeMap, HashSet};
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, ContinuousCDF};

use artifact_trust::auditor::{canned_mutation, oracle_trace, AuditorEndpoint, AuditorMode, AuditorProfile, MalformedKind};
use artifact_trust::config::RunConfig;
use artifact_trust::corpus::{curate, load_candidates};
use artifact_trust::endpoint::ChatEndpoint;
use artifact_trust::harness::prompt::prompt_sha256;
use artifact_trust::harness::store::read_traces;
use artifact_trust::harness::{render_blind_prompt, run_matrix, scan_leaks, EndpointProfile, RunOptions, TraceStore};
use artifact_trust::jsonl;
use artifact_trust::metrics::{
    calibration_gap, net_gain, partition_gap, rank_concordance, severity_breakdown, EvaluationRecord,
};
use artifact_trust::model::{Artifact, ArtifactBundle, Severity, Strategy, Variant};
use artifact_trust::perturb::{
    assemble_variant_matrix, plan_assignments, strip_description, strip_description_and_return, strip_return_tag,
    validate_mutation, VariantMatrix,
};
use artifact_trust::stages::{run_stage, Layout, Overrides, Stage};
use artifact_trust::trace::{
    derive_signals, repair_raw_output, validate_trace, Conflict, LabelBands, RankEntry, ReasoningTrace, Signal,
    SourcePrioritization, TraceKey, Verdict,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn timed(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    check(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn matrix_for(bundles: &[ArtifactBundle], seed: u64) -> VariantMatrix {
    let ids: Vec<String> = bundles.iter().map(|b| b.sample_id.clone()).collect();
    let by_id: BTreeMap<&str, &ArtifactBundle> = bundles.iter().map(|b| (b.sample_id.as_str(), b)).collect();
    let mutations: Vec<_> = plan_assignments(&ids, seed)
        .iter()
        .map(|p| {
            let base = by_id[p.sample_id.as_str()];
            validate_mutation(base, p, &canned_mutation(base, p)).expect("canned mutation validates")
        })
        .collect();
    assemble_variant_matrix(bundles, &mutations).expect("matrix is complete")
}

fn e2e_config(out: &Path, delay_ms: u64) -> RunConfig {
    let mut c = RunConfig::new(fixture("java_src"), out);
    c.seed = 11;
    let suffix = |sep: char| if delay_ms > 0 { format!("{sep}delay_ms={delay_ms}") } else { String::new() };
    c.endpoints = vec![
        EndpointProfile::new(&format!("auditor:oracle{}", suffix('?')), "oracle"),
        EndpointProfile::new(&format!("auditor:random?p=0.2&seed=5{}", suffix('&')), "random"),
    ];
    c
}

struct E2e {
    _dir: tempfile::TempDir,
    records: Vec<EvaluationRecord>,
    elapsed: Duration,
    stage_counts: Vec<(Stage, BTreeMap<String, usize>)>,
}

fn e2e() -> &'static Result<E2e, String> {
    static RUN: OnceLock<Result<E2e, String>> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config = e2e_config(&dir.path().join("out"), 0);
        let started = Instant::now();
        let mut stage_counts = Vec::new();
        for stage in [Stage::Curate, Stage::Perturb, Stage::Elicit, Stage::Evaluate, Stage::Report] {
            let s = run_stage(stage, config.clone(), &Overrides::default())
                .map_err(|e| format!("{}: {}", stage.as_str(), e.to_json(stage)))?;
            stage_counts.push((stage, s.counts));
        }
        let elapsed = started.elapsed();
        let layout = Layout { root: config.out.clone() };
        let records = jsonl::read_all(&layout.records()).map_err(|e| e.to_string())?;
        Ok(E2e {
            _dir: dir,
            records,
            elapsed,
            stage_counts,
        })
    })
}

fn criterion_1() -> Result<String, String> {
    #[derive(serde::Deserialize)]
    struct Case {
        doc: String,
        description_removed: String,
        return_removed: String,
        both_removed: String,
    }
    let started = Instant::now();
    let cases: Vec<Case> = serde_json::from_str(&std::fs::read_to_string(fixture("javadoc_blocks.json")).unwrap()).unwrap();
    check(cases.len() >= 20, || format!("only {} blocks", cases.len()))?;
    for (i, c) in cases.iter().enumerate() {
        let desc = strip_description(&c.doc);
        check(desc == c.description_removed, || format!("block {i}: description removal {desc:?}"))?;
        for line in c.doc.lines().filter(|l| l.trim_start().trim_start_matches("/**").trim_start_matches('*').trim_start().starts_with('@')) {
            check(desc.lines().any(|d| d == line), || format!("block {i}: tag line {line:?} not verbatim"))?;
        }
        let ret = strip_return_tag(&c.doc);
        check(ret == c.return_removed, || format!("block {i}: return removal {ret:?}"))?;
        let both = strip_description_and_return(&c.doc);
        check(both == c.both_removed, || format!("block {i}: combined {both:?}"))?;
        check(strip_description(&ret) == both && strip_return_tag(&desc) == both, || format!("block {i}: orders differ"))?;
    }
    timed(Duration::from_secs(1), started)?;
    Ok(format!("{} blocks, {:?}", cases.len(), started.elapsed()))
}

fn criterion_2() -> Result<String, String> {
    #[derive(serde::Deserialize)]
    struct Label {
        accepted: bool,
        failed_rules: Vec<String>,
    }
    let started = Instant::now();
    let candidates = load_candidates(&fixture("curation/candidates.jsonl")).map_err(|e| e.to_string())?;
    let labels: BTreeMap<String, Label> =
        serde_json::from_str(&std::fs::read_to_string(fixture("curation/labels.json")).unwrap()).unwrap();
    check(candidates.len() == 50, || format!("{} candidates", candidates.len()))?;
    let (accepted, verdicts) = curate(&candidates);
    let mut mismatches = Vec::new();
    for v in &verdicts {
        let want = &labels[&v.sample_id];
        let mut got: Vec<String> = v.failed_rules.iter().map(|r| serde_json::to_value(r).unwrap().as_str().unwrap().to_string()).collect();
        got.sort();
        let mut exp = want.failed_rules.clone();
        exp.sort();
        if v.accepted != want.accepted || got != exp {
            mismatches.push(format!("{} got {got:?} want {exp:?}", v.sample_id));
        }
    }
    check(mismatches.is_empty(), || mismatches.join("; "))?;
    check(accepted.len() == 18, || format!("{} accepted", accepted.len()))?;
    let lines: BTreeMap<&str, usize> = verdicts.iter().map(|v| (v.sample_id.as_str(), v.measured.executable_line_count)).collect();
    for (id, n) in [("fail-lines-7", 7), ("pass-lines-8", 8), ("pass-lines-60", 60), ("fail-lines-61", 61)] {
        check(lines[id] == n, || format!("{id} measured {} lines", lines[id]))?;
    }
    check(accepted.iter().any(|b| b.sample_id == "pass-void-no-return"), || "void exemption".into())?;
    timed(Duration::from_secs(1), started)?;
    Ok(format!("0 mismatches over 50, 18 accepted, {:?}", started.elapsed()))
}

fn template_trace() -> (ReasoningTrace, TraceKey) {
    let bundles = load_candidates(&fixture("curation/candidates.jsonl")).unwrap();
    let (accepted, _) = curate(&bundles);
    let matrix = matrix_for(&accepted[..1], 0);
    let record = matrix.records().find(|r| r.variant == Variant::Base).unwrap().clone();
    let raw = oracle_trace(&record, &AuditorProfile::new(AuditorMode::Oracle));
    let key = TraceKey {
        sample_id: record.sample_id.clone(),
        variant: Variant::Base,
        model_id: "m".into(),
    };
    (validate_trace(&raw, &key, &LabelBands::default()).unwrap(), key)
}

fn both(artifacts: &[Artifact]) -> bool {
    artifacts.contains(&Artifact::Javadoc) && artifacts.contains(&Artifact::Mut)
}

fn criterion_3() -> Result<String, String> {
    let (template, _) = template_trace();
    for combo in 0..8u8 {
        let (pca, ic, ir) = (combo & 1 != 0, combo & 2 != 0, combo & 4 != 0);
        let mut t = template.clone();
        let c = &mut t.consistency;
        c.pairwise.javadoc_mut.verdict = if pca { Verdict::Contradictory } else { Verdict::Consistent };
        c.identified_conflicts = vec![Conflict {
            artifacts: if ic { vec![Artifact::Mut, Artifact::Javadoc] } else { vec![Artifact::Signature, Artifact::Mut] },
            description: "c".into(),
        }];
        c.inconsistency.has_inconsistency = true;
        c.inconsistency.affected_artifacts = if ir { vec![Artifact::Javadoc, Artifact::Mut] } else { vec![Artifact::Javadoc] };
        let s = derive_signals(&t);
        let n = pca as u8 + ic as u8 + ir as u8;
        let want = [pca, ic, ir, n >= 1, n >= 2];
        let got = Signal::ALL.map(|x| s.fires(x));
        check(got == want, || format!("combo {combo:03b}: got {got:?} want {want:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut violations = 0;
    let verdicts = [Verdict::Consistent, Verdict::Contradictory, Verdict::Incomplete];
    let pick = |rng: &mut ChaCha8Rng| -> Vec<Artifact> { Artifact::ALL.into_iter().filter(|_| rng.random_bool(0.5)).collect() };
    for _ in 0..1000 {
        let mut t = template.clone();
        let c = &mut t.consistency;
        c.pairwise.javadoc_mut.verdict = verdicts[rng.random_range(0..3)];
        c.identified_conflicts = (0..rng.random_range(0..4))
            .map(|_| Conflict {
                artifacts: pick(&mut rng),
                description: "x".into(),
            })
            .collect();
        c.inconsistency.has_inconsistency = rng.random_bool(0.5);
        c.inconsistency.affected_artifacts = pick(&mut rng);
        let c = &t.consistency;
        let s = derive_signals(&t);
        let pca = c.pairwise.javadoc_mut.verdict == Verdict::Contradictory;
        let ic = c.identified_conflicts.iter().any(|k| both(&k.artifacts));
        let ir = c.inconsistency.has_inconsistency && both(&c.inconsistency.affected_artifacts);
        let bad = (s.ir_fires && !s.union_fires)
            || (s.majority_fires && !s.union_fires)
            || [s.pca_fires, s.ic_fires, s.ir_fires] != [pca, ic, ir];
        violations += bad as usize;
    }
    check(violations == 0, || format!("{violations} violations"))?;
    Ok("8 combinations, 1000 random traces, 0 violations".into())
}

fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let (mut c, mut d, mut tx, mut ty) = (0.0f64, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1.0;
            } else if dy == 0.0 {
                ty += 1.0;
            } else if (dx > 0.0) == (dy > 0.0) {
                c += 1.0;
            } else {
                d += 1.0;
            }
        }
    }
    (c - d) / ((c + d + tx) * (c + d + ty)).sqrt()
}

fn criterion_4() -> Result<String, String> {
    let mut perms = Vec::new();
    for a in 1..=4u8 {
        for b in 1..=4u8 {
            for c in 1..=4u8 {
                for d in 1..=4u8 {
                    let p = [a, b, c, d];
                    if p.iter().collect::<HashSet<_>>().len() == 4 {
                        perms.push(p);
                    }
                }
            }
        }
    }
    check(perms.len() == 24, || "24 permutations".into())?;
    let mut worst = 0.0f64;
    for p in &perms {
        let prio = SourcePrioritization {
            ranking: Artifact::ALL
                .iter()
                .zip(p)
                .map(|(&source, &rank)| RankEntry {
                    source,
                    rank,
                    confidence: 0.5,
                })
                .collect(),
        };
        for (k, &faulty) in Artifact::ALL.iter().enumerate() {
            let got = rank_concordance(&prio, &[faulty]).map_err(|e| format!("{p:?}: {e:?}"))?;
            let labels: Vec<f64> = (0..4).map(|i| f64::from(i == k)).collect();
            let ranks: Vec<f64> = p.iter().map(|&r| f64::from(r)).collect();
            worst = worst.max((got - brute_tau_b(&labels, &ranks)).abs());
        }
    }
    check(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("96 cases, max deviation {worst:e}"))
}

fn round_to(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}

fn criterion_5() -> Result<String, String> {
    let gain = net_gain(0.875, 0.11);
    check(round_to(gain, 1) == 76.5, || format!("net gain {gain}"))?;

    let mut reader = csv::Reader::from_path(fixture("similarity_samples.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<(bool, f64)> = reader.deserialize().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let sim = partition_gap(rows);
    let (n_det, n_mis) = (sim.n_detected, sim.n_missed);
    check(n_det == 2477 && n_mis == 712, || format!("partition sizes {n_det}/{n_mis}"))?;
    let (d, m) = (sim.detected_mean.unwrap(), sim.missed_mean.unwrap());
    check(round_to(d, 3) == 0.833 && round_to(m, 3) == 0.730, || format!("means {d} {m}"))?;
    let sim_gap = sim.gap.unwrap();
    check(round_to(sim_gap, 3) == 0.104, || format!("similarity gap {sim_gap}"))?;

    let records: Vec<EvaluationRecord> = jsonl::read_all(&fixture("calibration_records.jsonl")).map_err(|e| e.to_string())?;
    let refs: Vec<&EvaluationRecord> = records.iter().collect();
    let cal = calibration_gap(&refs, Signal::Ir);
    let cal_gap = cal.gap.unwrap();
    check(round_to(cal.detected_mean.unwrap(), 2) == 0.90 && round_to(cal.missed_mean.unwrap(), 2) == 0.17, || format!("{cal:?}"))?;
    check(round_to(cal_gap, 2) == 0.73, || format!("calibration gap {cal_gap}"))?;

    let template = load_candidates(&fixture("curation/candidates.jsonl")).unwrap();
    let (accepted, _) = curate(&template);
    let bundles: Vec<ArtifactBundle> = (0..456)
        .map(|i| {
            let mut b = accepted[i % accepted.len()].clone();
            b.sample_id = format!("s{i:03}");
            b.mut_body = b.mut_body.replacen('{', &format!("{{\n    int pad{i} = 0;"), 1);
            b
        })
        .collect();
    let matrix = matrix_for(&bundles, 3);
    check(matrix.len() == 3192, || format!("matrix has {} records", matrix.len()))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut store = TraceStore::open(dir.path()).map_err(|e| e.to_string())?;
    let endpoints: Vec<(EndpointProfile, Arc<dyn ChatEndpoint>)> = (0..7)
        .map(|k| {
            let e: Arc<dyn ChatEndpoint> = Arc::new(AuditorEndpoint::for_matrix(AuditorProfile::new(AuditorMode::Silent), &matrix));
            (EndpointProfile::new("auditor:silent", &format!("model-{k}")), e)
        })
        .collect();
    let options = RunOptions {
        bands: LabelBands::default(),
        stop_after: Some(1),
        variants: None,
    };
    let run = run_matrix(&endpoints, &matrix, &mut store, &options).map_err(|e| e.to_string())?;
    check(run.total_cells == 22344, || format!("{} cells", run.total_cells))?;
    Ok(format!(
        "net gain {gain:.1} pp, similarity gap {sim_gap:+.3}, calibration gap {cal_gap:.2}, 456 x 7 = {}, x 7 = {}",
        matrix.len(),
        run.total_cells
    ))
}

/// Exact two-sided interval for a binomial proportion.
fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    let a = (1.0 - confidence) / 2.0;
    let lo = if k == 0 { 0.0 } else { Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(a) };
    let hi = if k == n { 1.0 } else { Beta::new((k + 1) as f64, (n - k) as f64).unwrap().inverse_cdf(1.0 - a) };
    (lo, hi)
}

fn criterion_6() -> Result<String, String> {
    let run = e2e().as_ref().map_err(Clone::clone)?;
    for (stage, counts) in &run.stage_counts {
        match stage {
            Stage::Curate => check(counts["accepted"] == 20, || format!("curate {counts:?}"))?,
            Stage::Elicit => check(counts["stored_traces"] == 280 && counts["failed"] == 0, || format!("elicit {counts:?}"))?,
            _ => {}
        }
    }
    let recs = |model: &str, variant: Variant| -> Vec<&EvaluationRecord> {
        run.records.iter().filter(|r| r.model() == model && r.variant() == variant).collect()
    };
    let oracle_base = recs("oracle", Variant::Base);
    check(oracle_base.len() == 20, || "oracle BASE count".into())?;
    let fp = oracle_base.iter().filter(|r| Signal::ALL.iter().any(|&s| r.signals.fires(s))).count();
    check(fp == 0, || format!("oracle fired on {fp} BASE records"))?;
    let targeted: Vec<_> = recs("oracle", Variant::Contradiction)
        .into_iter()
        .filter(|r| matches!(r.strategy, Some(Strategy::DocstringOnly | Strategy::Both)))
        .collect();
    for s in [Strategy::DocstringOnly, Strategy::Both] {
        check(targeted.iter().any(|r| r.strategy == Some(s)), || format!("no {s:?} records"))?;
    }
    let missed = targeted.iter().filter(|r| !r.signals.ir_fires).count();
    check(missed == 0, || format!("IR missed {missed} of {}", targeted.len()))?;

    let random_base = recs("random", Variant::Base);
    let n = random_base.len() as u64;
    let mut rates = Vec::new();
    for s in Signal::BASE {
        let k = random_base.iter().filter(|r| r.signals.fires(s)).count() as u64;
        let (lo, hi) = clopper_pearson(k, n, 0.99);
        check(lo <= 0.2 && 0.2 <= hi, || format!("{} rate {k}/{n} interval [{lo:.3}, {hi:.3}] excludes 0.2", s.as_str()))?;
        rates.push(format!("{}={k}/{n}", s.as_str()));
    }
    timed(Duration::from_secs(60), Instant::now() - run.elapsed)?;
    Ok(format!(
        "oracle BASE FP 0/20, IR {}/{} on DOCSTRING_ONLY+BOTH, random {}, {:?}",
        targeted.len(),
        targeted.len(),
        rates.join(" "),
        run.elapsed
    ))
}

fn count_lines(path: &Path) -> usize {
    std::fs::read(path).map(|b| b.iter().filter(|&&c| c == b'\n').count()).unwrap_or(0)
}

fn criterion_7() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let config = e2e_config(&out, 25);
    for stage in [Stage::Curate, Stage::Perturb] {
        run_stage(stage, config.clone(), &Overrides::default()).map_err(|e| e.to_string())?;
    }
    let config_path = dir.path().join("run.toml");
    std::fs::write(&config_path, config.to_toml()).map_err(|e| e.to_string())?;
    let layout = Layout { root: out.clone() };
    let bin = env!("CARGO_BIN_EXE_artifact-trust");
    let elicit = |resume: bool| {
        let mut cmd = Command::new(bin);
        cmd.arg("elicit").arg("--config").arg(&config_path).stdout(Stdio::null()).stderr(Stdio::piped());
        if resume {
            cmd.arg("--resume");
        }
        cmd
    };

    let mut child = elicit(false).spawn().map_err(|e| e.to_string())?;
    let deadline = Instant::now() + Duration::from_secs(30);
    while count_lines(&layout.traces()) < 112 {
        if Instant::now() > deadline || child.try_wait().map_err(|e| e.to_string())?.is_some() {
            let _ = child.kill();
            return Err("elicit finished or stalled before the kill point".into());
        }
        std::thread::sleep(Duration::from_millis(2));
    }
    child.kill().map_err(|e| e.to_string())?;
    child.wait().map_err(|e| e.to_string())?;
    let at_kill = count_lines(&layout.traces());
    check((112..280).contains(&at_kill), || format!("{at_kill} traces at kill"))?;

    let refused = elicit(false).output().map_err(|e| e.to_string())?;
    check(!refused.status.success(), || "rerun without --resume was accepted".into())?;
    check(String::from_utf8_lossy(&refused.stderr).contains("STORE_EXISTS"), || "missing STORE_EXISTS".into())?;

    let resumed = elicit(true).output().map_err(|e| e.to_string())?;
    check(resumed.status.success(), || String::from_utf8_lossy(&resumed.stderr).into_owned())?;

    let traces = read_traces(&layout.dir(Stage::Elicit)).map_err(|e| e.to_string())?;
    let keys: HashSet<_> = traces.iter().map(|t| t.key.clone()).collect();
    check(traces.len() == 280, || format!("{} traces after resume", traces.len()))?;
    check(keys.len() == 280, || format!("{} distinct keys", keys.len()))?;

    let matrix = VariantMatrix::read(&layout.dir(Stage::Perturb)).map_err(|e| e.to_string())?;
    let bases: BTreeMap<&str, &ArtifactBundle> =
        matrix.records().filter(|r| r.variant == Variant::Base).map(|r| (r.sample_id.as_str(), &r.bundle)).collect();
    let mut hits = 0;
    for t in &traces {
        let base = bases[t.key.sample_id.as_str()];
        let prompt = render_blind_prompt(&t.provenance, base).map_err(|e| format!("{}: {e}", t.key))?;
        check(prompt_sha256(&prompt.system, &prompt.user) == t.prompt_sha256, || format!("{}: prompt hash differs", t.key))?;
        let baseline = artifact_trust::harness::prompt::render_user_text(base);
        hits += scan_leaks(&prompt.user, &t.provenance.provenance_strings(), &baseline).len();
    }
    check(hits == 0, || format!("{hits} leak hits"))?;
    Ok(format!("killed at {at_kill}/280, resumed to 280 unique keys, 0 leak hits"))
}

fn criterion_8() -> Result<String, String> {
    let (_, key) = template_trace();
    let bundles = load_candidates(&fixture("curation/candidates.jsonl")).unwrap();
    let (accepted, _) = curate(&bundles);
    let matrix = matrix_for(&accepted[..1], 0);
    let bands = LabelBands::default();
    let mut repaired = 0;
    for record in matrix.records() {
        let key = TraceKey {
            variant: record.variant,
            ..key.clone()
        };
        let valid = oracle_trace(record, &AuditorProfile::new(AuditorMode::Oracle));
        let same = repair_raw_output(&valid).map_err(|e| e.to_string())?;
        check(same == valid, || format!("{}: valid output changed by repair", record.variant))?;
        for kind in MalformedKind::ALL {
            let raw = oracle_trace(record, &AuditorProfile::new(AuditorMode::Malformed { kind }));
            check(serde_json::from_str::<serde_json::Value>(&raw).is_err(), || format!("{kind:?} parses unrepaired"))?;
            let fixed = repair_raw_output(&raw).map_err(|e| format!("{kind:?}: {e}"))?;
            validate_trace(&fixed, &key, &bands).map_err(|e| format!("{kind:?}: {e}"))?;
            check(repair_raw_output(&fixed).as_deref() == Ok(fixed.as_str()), || format!("{kind:?}: repair not idempotent"))?;
            repaired += 1;
        }
    }
    Ok(format!("{repaired}/{repaired} malformed outputs recovered, valid outputs unchanged"))
}

fn criterion_9() -> Result<String, String> {
    let run = e2e().as_ref().map_err(Clone::clone)?;
    let oracle: Vec<&EvaluationRecord> =
        run.records.iter().filter(|r| r.model() == "oracle" && r.variant() == Variant::MutBug).collect();
    let b = severity_breakdown(&oracle).map_err(|e| e.to_string())?;
    let gap = b.gap;
    check(b.monotonic, || format!("not monotonic: {b:?}"))?;
    check((gap - 0.25).abs() <= 1e-9, || format!("gap {gap}"))?;

    let inverted: Vec<EvaluationRecord> = oracle
        .iter()
        .map(|r| {
            let mut r = (*r).clone();
            r.severity = r.severity.map(|s| match s {
                Severity::Heavy => Severity::Subtle,
                Severity::Subtle => Severity::Heavy,
                Severity::Normal => Severity::Normal,
            });
            r
        })
        .collect();
    let inv = severity_breakdown(&inverted.iter().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    check(!inv.monotonic, || "inverted tiers reported monotonic".into())?;
    Ok(format!("oracle monotonic with gap {gap:.2}, inverted set non-monotonic"))
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("removal transforms", criterion_1),
        ("curation labels", criterion_2),
        ("signal truth table", criterion_3),
        ("tau-b oracle", criterion_4),
        ("arithmetic replay", criterion_5),
        ("end-to-end reference run", criterion_6),
        ("kill and resume", criterion_7),
        ("malformed repair", criterion_8),
        ("severity monotonicity", criterion_9),
    ];
    let mut failed = 0;
    let mut stdout = std::io::stdout().lock();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        writeln!(stdout, "{tag} criterion {}: {name}: {detail}", i + 1).unwrap();
    }
    writeln!(stdout, "acceptance: {}/9 passed", 9 - failed).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
