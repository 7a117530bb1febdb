use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{mean_sd, MetricError};
use crate::metrics::EvaluationRecord;
use crate::model::Severity;
use crate::trace::Dimension;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// mean(perturbed) − mean(base), in `Dimension::ALL` order.
    pub deltas: [f64; 5],
    pub paired: usize,
    /// Samples present on only one side.
    pub unpaired: usize,
}

/// Paired per-dimension mean shift from `base` to `perturbed`.
pub fn delta_from_base(base: &[&EvaluationRecord], perturbed: &[&EvaluationRecord]) -> Result<DeltaReport, MetricError> {
    let by_id: HashMap<&str, &EvaluationRecord> = base.iter().map(|r| (r.key.sample_id.as_str(), *r)).collect();
    let pairs: Vec<(&EvaluationRecord, &EvaluationRecord)> = perturbed
        .iter()
        .filter_map(|p| by_id.get(p.key.sample_id.as_str()).map(|b| (*b, *p)))
        .collect();
    if pairs.is_empty() {
        return Err(MetricError::EmptyGroup("no paired samples".into()));
    }
    let n = pairs.len() as f64;
    let deltas = Dimension::ALL.map(|d| {
        let b: f64 = pairs.iter().map(|(b, _)| b.score(d)).sum::<f64>() / n;
        let p: f64 = pairs.iter().map(|(_, p)| p.score(d)).sum::<f64>() / n;
        p - b
    });
    Ok(DeltaReport {
        deltas,
        paired: pairs.len(),
        unpaired: base.len() + perturbed.len() - 2 * pairs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierStats {
    pub severity: Severity,
    pub mean: f64,
    pub sd: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityBreakdown {
    /// SUBTLE, NORMAL, HEAVY.
    pub tiers: [TierStats; 3],
    /// mean(HEAVY) < mean(NORMAL) <= mean(SUBTLE)
    pub monotonic: bool,
    /// mean(SUBTLE) − mean(HEAVY)
    pub gap: f64,
}

pub fn monotonic(subtle: f64, normal: f64, heavy: f64) -> bool {
    heavy < normal && normal <= subtle
}

/// Overall-score means per severity tier. Records without a severity are
/// ignored; an empty tier refuses the breakdown.
pub fn severity_breakdown(records: &[&EvaluationRecord]) -> Result<SeverityBreakdown, MetricError> {
    let tier = |s: Severity| -> Result<TierStats, MetricError> {
        let xs: Vec<f64> = records
            .iter()
            .filter(|r| r.severity == Some(s))
            .map(|r| r.score(Dimension::Overall))
            .collect();
        let (mean, sd) = mean_sd(&xs).ok_or_else(|| MetricError::EmptyGroup(format!("no {s} records")))?;
        Ok(TierStats {
            severity: s,
            mean,
            sd,
            n: xs.len(),
        })
    };
    let tiers = [tier(Severity::Subtle)?, tier(Severity::Normal)?, tier(Severity::Heavy)?];
    Ok(SeverityBreakdown {
        monotonic: monotonic(tiers[0].mean, tiers[1].mean, tiers[2].mean),
        gap: tiers[0].mean - tiers[2].mean,
        tiers,
    })
}
