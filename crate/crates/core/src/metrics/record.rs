use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::harness::{RunKey, StoredTrace};
use crate::model::{Artifact, Severity, Strategy, Variant};
use crate::perturb::{PerturbationRecord, VariantMatrix};
use crate::trace::{derive_signals, Dimension, RankEntry, SignalVector};

/// A stored trace joined with the provenance of the cell that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub key: RunKey,
    pub severity: Option<Severity>,
    pub strategy: Option<Strategy>,
    pub affected_artifacts: Vec<Artifact>,
    pub ground_truth_summary: String,
    /// Indexed in `Dimension::ALL` order.
    pub scores: [f64; 5],
    pub signals: SignalVector,
    pub ranking: Vec<RankEntry>,
    pub overall_confidence: f64,
}

impl EvaluationRecord {
    pub fn from_stored(stored: &StoredTrace) -> EvaluationRecord {
        let p = &stored.provenance;
        let t = &stored.trace;
        EvaluationRecord {
            key: stored.key.clone(),
            severity: p.severity,
            strategy: p.strategy,
            affected_artifacts: p.affected_artifacts.clone(),
            ground_truth_summary: p.ground_truth_summary.clone(),
            scores: Dimension::ALL.map(|d| t.assessment.get(d).score),
            signals: derive_signals(t),
            ranking: t.prioritization.ranking.clone(),
            overall_confidence: t.overall_confidence,
        }
    }

    pub fn variant(&self) -> Variant {
        self.key.variant
    }

    pub fn model(&self) -> &str {
        &self.key.model_id
    }

    pub fn score(&self, d: Dimension) -> f64 {
        self.scores[d as usize]
    }

    /// Mutation-family records are the ones a detector should flag.
    pub fn should_fire(&self) -> bool {
        self.key.variant.is_mutation()
    }

    /// Artifacts that carry the fault; empty outside the mutation families.
    pub fn faulty(&self) -> &[Artifact] {
        if self.should_fire() {
            &self.affected_artifacts
        } else {
            &[]
        }
    }
}

fn same_provenance(a: &PerturbationRecord, b: &PerturbationRecord) -> bool {
    a.variant == b.variant
        && a.severity == b.severity
        && a.strategy == b.strategy
        && a.affected_artifacts == b.affected_artifacts
        && a.ground_truth_summary == b.ground_truth_summary
}

/// One record per stored trace, checked against the perturbation archive.
pub fn evaluation_records(traces: &[StoredTrace], matrix: &VariantMatrix) -> Result<Vec<EvaluationRecord>, MetricError> {
    let archive: HashMap<(Variant, &str), &PerturbationRecord> =
        matrix.records().map(|r| ((r.variant, r.sample_id.as_str()), r)).collect();
    traces
        .iter()
        .map(|s| {
            match archive.get(&(s.key.variant, s.key.sample_id.as_str())) {
                Some(r) if same_provenance(r, &s.provenance) => Ok(EvaluationRecord::from_stored(s)),
                Some(_) => Err(MetricError::ProvenanceMismatch(s.key.to_string())),
                None => Err(MetricError::NotInArchive(s.key.to_string())),
            }
        })
        .collect()
}
