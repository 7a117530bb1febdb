//! Metrics over evaluation records: score shifts, severity monotonicity,
//! detection rates, description fidelity, calibration and rank concordance.

pub mod concordance;
pub mod detection;
pub mod record;
pub mod report;
pub mod scores;
pub mod similarity;

use statrs::statistics::Statistics;

pub use concordance::{kendall_tau_b, rank_concordance, ConcordanceSkip};
pub use detection::{calibration_gap, detection_rate, net_gain, partition_gap, PartitionGap};
pub use record::{evaluation_records, EvaluationRecord};
pub use report::{compute_report, read_csv, write_csv, MetricRow, SimilaritySource};
pub use scores::{delta_from_base, severity_breakdown, DeltaReport, SeverityBreakdown, TierStats};
pub use similarity::{
    cosine, description_similarity, CombineMode, EmbedError, Embedder, EmbeddingTable, HashingEmbedder, HttpEmbedder,
    SimilarityScores, DEFAULT_EMBEDDING_MODEL,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("empty group: {0}")]
    EmptyGroup(String),
    #[error("{0} is not in the perturbation archive")]
    NotInArchive(String),
    #[error("{0} carries provenance that differs from the archive")]
    ProvenanceMismatch(String),
}

/// Mean and sample standard deviation; `None` for an empty slice, no
/// deviation below two values.
pub fn mean_sd(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let sd = (xs.len() > 1).then(|| xs.std_dev());
    Some((xs.mean(), sd))
}
