//! Tier/strategy assignment and assembly of the seven aligned datasets.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mutation::MutationPlan;
use super::record::PerturbationRecord;
use crate::jsonl::{self, JsonlError};
use crate::model::{ArtifactBundle, FaultCategory, Severity, Strategy, Variant};

fn shuffle_key(seed: u64, family: Variant, sample_id: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(family.as_str().as_bytes());
    h.update([0]);
    h.update(sample_id.as_bytes());
    h.finalize().into()
}

/// Severity (and, for contradictions, strategy) per sample and family.
///
/// Each family orders samples by a seeded hash of their id and deals tiers
/// round-robin, so tier sizes differ by at most one. Contradiction
/// strategies are dealt round-robin inside each tier with a per-tier
/// rotation, crossing the two factors.
pub fn plan_assignments(sample_ids: &[String], seed: u64) -> Vec<MutationPlan> {
    let mut plans: HashMap<(&str, Variant), MutationPlan> = HashMap::new();
    for family in Variant::MUTATION_FAMILIES {
        let mut order: Vec<&String> = sample_ids.iter().collect();
        order.sort_by_cached_key(|id| shuffle_key(seed, family, id));
        for (pos, id) in order.into_iter().enumerate() {
            let tier = pos % 3;
            let strategy = (family == Variant::Contradiction).then(|| Strategy::ALL[(pos / 3 + tier) % 3]);
            plans.insert(
                (id.as_str(), family),
                MutationPlan {
                    sample_id: id.clone(),
                    variant: family,
                    severity: Severity::ALL[tier],
                    strategy,
                },
            );
        }
    }
    sample_ids
        .iter()
        .flat_map(|id| Variant::MUTATION_FAMILIES.map(|f| plans[&(id.as_str(), f)].clone()))
        .collect()
}

/// Seven archives in base-bundle order, keyed by variant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariantMatrix {
    pub datasets: BTreeMap<Variant, Vec<PerturbationRecord>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("variant matrix incomplete: {} missing cells", missing.len())]
pub struct MatrixError {
    pub missing: Vec<(String, Variant)>,
}

/// Builds BASE and the removal variants from `accepted` and aligns them with
/// the mutation records. Every sample must have all three mutation families.
pub fn assemble_variant_matrix(
    accepted: &[ArtifactBundle],
    mutations: &[PerturbationRecord],
) -> Result<VariantMatrix, MatrixError> {
    let by_key: HashMap<(&str, Variant), &PerturbationRecord> = mutations
        .iter()
        .filter(|r| r.variant.is_mutation())
        .map(|r| ((r.sample_id.as_str(), r.variant), r))
        .collect();
    let mut missing = Vec::new();
    let mut datasets: BTreeMap<Variant, Vec<PerturbationRecord>> =
        Variant::ALL.into_iter().map(|v| (v, Vec::with_capacity(accepted.len()))).collect();
    for bundle in accepted {
        for variant in Variant::ALL {
            let record = match variant {
                Variant::Base => PerturbationRecord::base(bundle),
                v if v.is_removal() => PerturbationRecord::removal(bundle, v),
                v => match by_key.get(&(bundle.sample_id.as_str(), v)) {
                    Some(r) => (*r).clone(),
                    None => {
                        missing.push((bundle.sample_id.clone(), v));
                        continue;
                    }
                },
            };
            datasets.get_mut(&variant).unwrap().push(record);
        }
    }
    if !missing.is_empty() {
        return Err(MatrixError { missing });
    }
    Ok(VariantMatrix { datasets })
}

impl VariantMatrix {
    pub fn len(&self) -> usize {
        self.datasets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> impl Iterator<Item = &PerturbationRecord> {
        self.datasets.values().flatten()
    }

    pub fn sample_ids(&self) -> Vec<String> {
        self.datasets
            .get(&Variant::Base)
            .map(|v| v.iter().map(|r| r.sample_id.clone()).collect())
            .unwrap_or_default()
    }

    pub fn file_name(variant: Variant) -> String {
        format!("{}.jsonl", variant.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<(), JsonlError> {
        for (variant, records) in &self.datasets {
            jsonl::write_all(&dir.join(Self::file_name(*variant)), records)?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<VariantMatrix, JsonlError> {
        let mut datasets = BTreeMap::new();
        for v in Variant::ALL {
            datasets.insert(v, jsonl::read_all(&dir.join(Self::file_name(v)))?);
        }
        Ok(VariantMatrix { datasets })
    }

    /// Restricts every dataset to the first `limit` samples.
    pub fn truncate(&mut self, limit: usize) {
        for records in self.datasets.values_mut() {
            records.truncate(limit);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub sample_id: String,
    pub variant: Variant,
    pub severity: Option<Severity>,
    pub strategy: Option<Strategy>,
    pub fault_category: Option<FaultCategory>,
    pub ground_truth_summary: String,
    pub review_status: String,
}

/// Every accepted mutation, queued for manual verification.
pub fn review_queue(matrix: &VariantMatrix) -> Vec<ReviewItem> {
    matrix
        .records()
        .filter(|r| r.variant.is_mutation())
        .map(|r| ReviewItem {
            sample_id: r.sample_id.clone(),
            variant: r.variant,
            severity: r.severity,
            strategy: r.strategy,
            fault_category: r.fault_category,
            ground_truth_summary: r.ground_truth_summary.clone(),
            review_status: "PENDING".into(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("S{i:04}")).collect()
    }

    fn tier_counts(plans: &[MutationPlan], family: Variant) -> [usize; 3] {
        let mut c = [0; 3];
        for p in plans.iter().filter(|p| p.variant == family) {
            c[Severity::ALL.iter().position(|s| *s == p.severity).unwrap()] += 1;
        }
        c
    }

    #[test]
    fn tiers_balance_exactly_on_456() {
        let plans = plan_assignments(&ids(456), 7);
        assert_eq!(plans.len(), 456 * 3);
        for f in Variant::MUTATION_FAMILIES {
            assert_eq!(tier_counts(&plans, f), [152, 152, 152]);
        }
    }

    #[test]
    fn three_samples_one_per_tier() {
        let plans = plan_assignments(&ids(3), 1);
        for f in Variant::MUTATION_FAMILIES {
            assert_eq!(tier_counts(&plans, f), [1, 1, 1]);
        }
    }

    #[test]
    fn strategies_cross_severity() {
        let plans = plan_assignments(&ids(90), 3);
        let mut cells: HashMap<(Severity, Strategy), usize> = HashMap::new();
        for p in plans.iter().filter(|p| p.variant == Variant::Contradiction) {
            *cells.entry((p.severity, p.strategy.unwrap())).or_default() += 1;
        }
        assert_eq!(cells.len(), 9);
        assert!(cells.values().all(|&n| n == 10), "{cells:?}");
        assert!(plans.iter().filter(|p| p.variant != Variant::Contradiction).all(|p| p.strategy.is_none()));
    }

    #[test]
    fn assignment_is_seeded() {
        assert_eq!(plan_assignments(&ids(30), 5), plan_assignments(&ids(30), 5));
        assert_ne!(plan_assignments(&ids(30), 5), plan_assignments(&ids(30), 6));
    }

    #[test]
    fn missing_cells_are_listed() {
        let b = crate::perturb::mutation::tests::sample_bundle();
        let err = assemble_variant_matrix(std::slice::from_ref(&b), &[]).unwrap_err();
        assert_eq!(
            err.missing,
            Variant::MUTATION_FAMILIES.map(|v| (b.sample_id.clone(), v)).to_vec()
        );
    }
}
