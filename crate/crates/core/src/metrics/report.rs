//! Long-format metric tables: one row per (grouping, statistic).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::concordance::{rank_concordance, ConcordanceSkip};
use super::detection::{calibration_gap, detection_rate, net_gain, partition_gap, PartitionGap};
use super::scores::{delta_from_base, severity_breakdown};
use super::similarity::{similarity_from_table, CombineMode, EmbeddingTable, SimilarityScores};
use super::{mean_sd, EvaluationRecord};
use crate::harness::RunKey;
use crate::model::{Severity, Strategy, Variant};
use crate::trace::{Dimension, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub variant: Option<Variant>,
    pub severity: Option<Severity>,
    pub strategy: Option<Strategy>,
    /// A detection signal, or COMBINED for the joint similarity score.
    pub signal: Option<String>,
    pub dimension: Option<Dimension>,
    pub statistic: String,
    pub value: Option<f64>,
    pub n: usize,
    pub sd: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Group {
    variant: Option<Variant>,
    severity: Option<Severity>,
    strategy: Option<Strategy>,
    signal: Option<String>,
    dimension: Option<Dimension>,
}

pub enum SimilaritySource<'a> {
    Table(&'a EmbeddingTable, CombineMode),
    Unavailable(String),
}

struct Rows<'m> {
    model: &'m str,
    out: Vec<MetricRow>,
}

impl Rows<'_> {
    fn push(&mut self, g: &Group, statistic: &str, value: Option<f64>, n: usize, sd: Option<f64>, note: impl Into<String>) {
        self.out.push(MetricRow {
            model: self.model.to_string(),
            variant: g.variant,
            severity: g.severity,
            strategy: g.strategy,
            signal: g.signal.clone(),
            dimension: g.dimension,
            statistic: statistic.to_string(),
            value,
            n,
            sd,
            note: note.into(),
        });
    }

    fn summary(&mut self, g: &Group, statistic: &str, xs: &[f64], note: &str) {
        if let Some((mean, sd)) = mean_sd(xs) {
            self.push(g, statistic, Some(mean), xs.len(), sd, note);
        }
    }

    fn partition(&mut self, g: &Group, prefix: &str, gap_name: &str, p: &PartitionGap) {
        if p.n_detected > 0 {
            self.push(g, &format!("{prefix}_detected_mean"), p.detected_mean, p.n_detected, None, "");
        }
        if p.n_missed > 0 {
            self.push(g, &format!("{prefix}_missed_mean"), p.missed_mean, p.n_missed, None, "");
        }
        let note = format!(
            "n_detected={} n_missed={}{}",
            p.n_detected,
            p.n_missed,
            if p.gap.is_none() { " undefined: empty partition" } else { "" }
        );
        if p.n_detected + p.n_missed > 0 {
            self.push(g, gap_name, p.gap, p.n_detected + p.n_missed, None, note);
        }
    }
}

fn group() -> Group {
    Group::default()
}

fn by<'a, K: Ord, F: Fn(&EvaluationRecord) -> Option<K>>(records: &[&'a EvaluationRecord], key: F) -> BTreeMap<K, Vec<&'a EvaluationRecord>> {
    let mut map: BTreeMap<K, Vec<&'a EvaluationRecord>> = BTreeMap::new();
    for r in records {
        if let Some(k) = key(r) {
            map.entry(k).or_default().push(r);
        }
    }
    map
}

const COMBINED: &str = "COMBINED";

fn model_rows(rows: &mut Rows, records: &[&EvaluationRecord], sims: &BTreeMap<&RunKey, SimilarityScores>, similarity: &SimilaritySource) {
    let by_variant = by(records, |r| Some(r.variant()));
    let base = by_variant.get(&Variant::Base);

    for (&variant, rs) in &by_variant {
        for d in Dimension::ALL {
            let g = Group {
                variant: Some(variant),
                dimension: Some(d),
                ..group()
            };
            let xs: Vec<f64> = rs.iter().map(|r| r.score(d)).collect();
            rows.summary(&g, "score_mean", &xs, "");
            if variant == Variant::Base {
                continue;
            }
            if let Some(Ok(delta)) = base.map(|b| delta_from_base(b, rs)) {
                let note = if delta.unpaired > 0 { format!("unpaired={}", delta.unpaired) } else { String::new() };
                rows.push(&g, "delta_from_base", Some(delta.deltas[d as usize]), delta.paired, None, note);
            }
            if variant.is_mutation() {
                for (sev, srs) in by(rs, |r| r.severity) {
                    if let Some(Ok(delta)) = base.map(|b| delta_from_base(b, &srs)) {
                        let g = Group { severity: Some(sev), ..g.clone() };
                        rows.push(&g, "delta_from_base", Some(delta.deltas[d as usize]), delta.paired, None, "");
                    }
                }
            }
        }

        for s in Signal::ALL {
            let g = Group {
                variant: Some(variant),
                signal: Some(s.as_str().into()),
                ..group()
            };
            let rate = detection_rate(rs, s).expect("non-empty group");
            rows.push(&g, "detection_rate", Some(rate), rs.len(), None, "");
            if variant == Variant::Base {
                rows.push(&g, "false_positive_floor", Some(rate), rs.len(), None, "per-signal floor on BASE");
            }
            if variant.is_mutation() {
                if let Some(Ok(floor)) = base.map(|b| detection_rate(b, s)) {
                    rows.push(&g, "net_gain_pp", Some(net_gain(rate, floor)), rs.len(), None, "relative to the BASE floor of the same signal");
                }
                for (sev, srs) in by(rs, |r| r.severity) {
                    let g = Group { severity: Some(sev), ..g.clone() };
                    rows.push(&g, "detection_rate", Some(detection_rate(&srs, s).unwrap()), srs.len(), None, "");
                }
                for (st, srs) in by(rs, |r| r.strategy) {
                    let g = Group { strategy: Some(st), ..g.clone() };
                    rows.push(&g, "detection_rate", Some(detection_rate(&srs, s).unwrap()), srs.len(), None, "");
                    for (sev, xrs) in by(&srs, |r| r.severity) {
                        let g = Group { severity: Some(sev), ..g.clone() };
                        rows.push(&g, "detection_rate", Some(detection_rate(&xrs, s).unwrap()), xrs.len(), None, "");
                    }
                }
            }
        }

        if !variant.is_mutation() {
            continue;
        }
        match severity_breakdown(rs) {
            Ok(b) => {
                let g = Group {
                    variant: Some(variant),
                    dimension: Some(Dimension::Overall),
                    ..group()
                };
                for t in &b.tiers {
                    rows.push(&Group { severity: Some(t.severity), ..g.clone() }, "tier_mean", Some(t.mean), t.n, t.sd, "");
                }
                let n = b.tiers.iter().map(|t| t.n).sum();
                rows.push(&g, "monotonic", Some(f64::from(b.monotonic as u8)), n, None, "HEAVY < NORMAL <= SUBTLE");
                rows.push(&g, "heavy_subtle_gap", Some(b.gap), n, None, "");
            }
            Err(e) => {
                let g = Group { variant: Some(variant), ..group() };
                rows.push(&g, "severity_breakdown_refused", None, rs.len(), None, e.to_string());
            }
        }

        let mut taus: BTreeMap<Option<Strategy>, Vec<f64>> = BTreeMap::new();
        let mut excluded = 0;
        for r in rs {
            let p = crate::trace::SourcePrioritization { ranking: r.ranking.clone() };
            match rank_concordance(&p, r.faulty()) {
                Ok(t) => taus.entry(r.strategy).or_default().push(t),
                Err(ConcordanceSkip::Both) => excluded += 1,
                Err(ConcordanceSkip::NoFault) => {}
            }
        }
        for (st, xs) in &taus {
            let g = Group {
                variant: Some(variant),
                strategy: *st,
                ..group()
            };
            rows.summary(&g, "rank_concordance", xs, "kendall tau-b");
        }
        if excluded > 0 {
            let g = Group {
                variant: Some(variant),
                strategy: Some(Strategy::Both),
                ..group()
            };
            rows.push(&g, "concordance_excluded_both", Some(excluded as f64), excluded, None, "two faulty artifacts");
        }

        if let SimilaritySource::Table(_, mode) = similarity {
            let mode_note = match mode {
                CombineMode::Concatenate => "combined = concatenation of fired texts",
                CombineMode::MeanOfFired => "combined = mean of fired cosines",
            };
            for (name, pick) in [("PCA", Some(Signal::Pca)), ("IC", Some(Signal::Ic)), ("IR", Some(Signal::Ir)), (COMBINED, None)] {
                let xs: Vec<f64> = rs
                    .iter()
                    .map(|r| {
                        let s = sims[&r.key];
                        pick.map_or(s.combined, |p| s.get(p))
                    })
                    .collect();
                let g = Group {
                    variant: Some(variant),
                    signal: Some(name.into()),
                    ..group()
                };
                rows.summary(&g, "description_similarity", &xs, if pick.is_none() { mode_note } else { "0 when not fired" });
            }
        }
    }

    let mutated: Vec<&EvaluationRecord> = records.iter().copied().filter(|r| r.should_fire()).collect();
    if mutated.is_empty() {
        return;
    }
    for s in Signal::ALL {
        let g = Group {
            signal: Some(s.as_str().into()),
            ..group()
        };
        rows.partition(&g, "confidence", "calibration_gap", &calibration_gap(&mutated, s));
        if let SimilaritySource::Table(..) = similarity {
            let p = partition_gap(mutated.iter().map(|r| (r.signals.fires(s), sims[&r.key].combined)));
            rows.partition(&g, "similarity", "similarity_gap", &p);
        }
    }
    if let SimilaritySource::Unavailable(reason) = similarity {
        rows.push(&group(), "description_similarity_unavailable", None, mutated.len(), None, reason.clone());
    }
}

/// Every metric over `records`, grouped per model.
pub fn compute_report(records: &[EvaluationRecord], similarity: &SimilaritySource) -> Vec<MetricRow> {
    let sims: BTreeMap<&RunKey, SimilarityScores> = match similarity {
        SimilaritySource::Table(table, mode) => records
            .iter()
            .map(|r| (&r.key, similarity_from_table(&r.signals, &r.ground_truth_summary, table, *mode)))
            .collect(),
        SimilaritySource::Unavailable(_) => BTreeMap::new(),
    };
    let all: Vec<&EvaluationRecord> = records.iter().collect();
    let mut out = Vec::new();
    for (model, rs) in by(&all, |r| Some(r.model().to_string())) {
        let mut rows = Rows { model: &model, out: Vec::new() };
        model_rows(&mut rows, &rs, &sims, similarity);
        out.extend(rows.out);
    }
    out
}

pub fn write_csv(path: &Path, rows: &[MetricRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<MetricRow>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
