use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use artifact_trust::config::RunConfig;
use artifact_trust::harness::store::read_traces;
use artifact_trust::harness::EndpointProfile;
use artifact_trust::model::Variant;
use artifact_trust::perturb::VariantMatrix;
use artifact_trust::stages::{run_stage, Layout, Overrides, Stage};

const ALL_STAGES: [Stage; 5] = [Stage::Curate, Stage::Perturb, Stage::Elicit, Stage::Evaluate, Stage::Report];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn config(out: &Path) -> RunConfig {
    let mut c = RunConfig::new(fixture("java_src"), out);
    c.seed = 4;
    c.endpoints = vec![
        EndpointProfile::new("auditor:oracle", "oracle"),
        EndpointProfile::new("auditor:random?p=0.3&seed=2", "random"),
    ];
    c
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn sorted_lines(bytes: &[u8]) -> Vec<&[u8]> {
    let mut v: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    v.sort();
    v
}

fn run_all(c: &RunConfig) {
    for s in ALL_STAGES {
        run_stage(s, c.clone(), &Overrides::default()).unwrap_or_else(|e| panic!("{}", e.to_json(s)));
    }
}

#[test]
fn reruns_are_byte_identical_apart_from_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let a = config(&dir.path().join("a"));
    let b = config(&dir.path().join("b"));
    run_all(&a);
    run_all(&b);
    let (fa, fb) = (files(&a.out), files(&b.out));
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (path, bytes) in &fa {
        if path.file_name().unwrap() == "summary.json" {
            continue;
        }
        if path == Path::new("elicit/traces.jsonl") {
            // append order follows completion order; the line set is fixed
            assert_eq!(sorted_lines(bytes), sorted_lines(&fb[path]));
        } else {
            assert!(bytes == &fb[path], "{} differs", path.display());
        }
    }
    // resuming a finished store does no work
    let resumed = run_stage(Stage::Elicit, a.clone(), &Overrides { resume: true, ..Overrides::default() }).unwrap();
    assert_eq!(resumed.counts["attempted"], 0);
    assert_eq!(resumed.counts["already_stored"], 280);
    assert_eq!(files(&a.out.join("elicit"))[Path::new("traces.jsonl")], fa[Path::new("elicit/traces.jsonl")]);
}

#[test]
fn limit_models_and_variants_restrict_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&dir.path().join("out"));
    run_stage(Stage::Curate, c.clone(), &Overrides::default()).unwrap();
    let p = run_stage(Stage::Perturb, c.clone(), &Overrides { limit: Some(5), ..Overrides::default() }).unwrap();
    assert_eq!(p.counts["matrix_records"], 35);
    assert_eq!(p.overrides["limit"], "5");
    let layout = Layout { root: c.out.clone() };
    assert_eq!(VariantMatrix::read(&layout.dir(Stage::Perturb)).unwrap().sample_ids().len(), 5);

    let o = Overrides {
        limit: Some(3),
        models: Some(vec!["oracle".into()]),
        variants: Some(vec![Variant::Base, Variant::MutBug]),
        ..Overrides::default()
    };
    let e = run_stage(Stage::Elicit, c.clone(), &o).unwrap();
    assert_eq!(e.counts["stored_traces"], 6);
    let traces = read_traces(&layout.dir(Stage::Elicit)).unwrap();
    assert!(traces.iter().all(|t| t.key.model_id == "oracle" && matches!(t.key.variant, Variant::Base | Variant::MutBug)));

    // widening the selection on resume fills in the rest under the same config hash
    let wider = run_stage(Stage::Elicit, c, &Overrides { resume: true, ..Overrides::default() }).unwrap();
    assert_eq!(wider.counts["already_stored"], 6);
    assert_eq!(wider.counts["stored_traces"], 70);
}

#[test]
fn changed_config_is_refused_on_resume() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&dir.path().join("out"));
    for s in [Stage::Curate, Stage::Perturb] {
        run_stage(s, c.clone(), &Overrides::default()).unwrap();
    }
    run_stage(Stage::Elicit, c.clone(), &Overrides { limit: Some(1), ..Overrides::default() }).unwrap();
    let o = Overrides {
        resume: true,
        seed: Some(99),
        ..Overrides::default()
    };
    let err = run_stage(Stage::Elicit, c, &o).unwrap_err();
    assert_eq!(err.kind(), "CONFIG_MISMATCH");
}

#[test]
fn cli_reports_missing_prerequisites_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&dir.path().join("out"));
    let path = dir.path().join("run.toml");
    std::fs::write(&path, c.to_toml()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_artifact-trust"))
        .args(["report", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["stage"], "report");
    assert_eq!(v["error"], "MISSING_PREREQUISITE");
    assert!(v["missing"][0].as_str().unwrap().ends_with("metrics.jsonl"));
}

#[test]
fn cli_runs_curate_on_an_archive_with_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("curation/candidates.jsonl"), dir.path().join("candidates.jsonl")).unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "corpus = \"candidates.jsonl\"\nout = \"out\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_artifact-trust"))
        .args(["curate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["counts"]["candidates"], 50);
    assert_eq!(v["counts"]["accepted"], 18);
    assert!(dir.path().join("out/curate/verdicts.jsonl").exists());
}

#[test]
fn cli_rejects_unknown_variants() {
    let out = Command::new(env!("CARGO_BIN_EXE_artifact-trust"))
        .args(["elicit", "--config", "x.toml", "--variants", "BASE,NOPE"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown variant"));
}
