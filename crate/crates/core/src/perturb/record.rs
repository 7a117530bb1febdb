use serde::{Deserialize, Serialize};

use super::removal::{strip_description, strip_description_and_return, strip_return_tag};
use crate::model::{Artifact, ArtifactBundle, FaultCategory, Severity, Strategy, Variant};

/// One aligned variant of a base bundle with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub sample_id: String,
    pub variant: Variant,
    pub severity: Option<Severity>,
    pub strategy: Option<Strategy>,
    pub fault_category: Option<FaultCategory>,
    pub affected_artifacts: Vec<Artifact>,
    pub ground_truth_summary: String,
    pub change_description: String,
    /// The bundle as presented for this variant.
    pub bundle: ArtifactBundle,
}

impl PerturbationRecord {
    pub fn base(bundle: &ArtifactBundle) -> PerturbationRecord {
        PerturbationRecord {
            sample_id: bundle.sample_id.clone(),
            variant: Variant::Base,
            severity: None,
            strategy: None,
            fault_category: None,
            affected_artifacts: Vec::new(),
            ground_truth_summary: String::new(),
            change_description: String::new(),
            bundle: bundle.clone(),
        }
    }

    /// # Panics
    /// If `variant` is not a removal variant.
    pub fn removal(bundle: &ArtifactBundle, variant: Variant) -> PerturbationRecord {
        let (javadoc, summary) = match variant {
            Variant::DocDescRemoved => (
                strip_description(&bundle.javadoc),
                "Documentation prose description removed; tags kept.",
            ),
            Variant::DocReturnRemoved => (
                strip_return_tag(&bundle.javadoc),
                "Documentation @return clause removed.",
            ),
            Variant::DocDescReturnRemoved => (
                strip_description_and_return(&bundle.javadoc),
                "Documentation prose description and @return clause removed.",
            ),
            other => panic!("{other} is not a removal variant"),
        };
        let mut b = bundle.clone();
        b.javadoc = javadoc;
        PerturbationRecord {
            sample_id: bundle.sample_id.clone(),
            variant,
            severity: None,
            strategy: None,
            fault_category: None,
            affected_artifacts: vec![Artifact::Javadoc],
            ground_truth_summary: summary.to_string(),
            change_description: summary.to_string(),
            bundle: b,
        }
    }

    /// Artifacts whose text carries the injected fault.
    pub fn faulty_artifacts(&self) -> &[Artifact] {
        if self.variant.is_mutation() {
            &self.affected_artifacts
        } else {
            &[]
        }
    }

    /// Strings that must never reach a model prompt. Empty for `BASE`.
    pub fn provenance_strings(&self) -> Vec<String> {
        if self.variant == Variant::Base {
            return Vec::new();
        }
        let mut out = vec![self.variant.as_str().to_string()];
        out.extend(self.severity.map(|s| s.as_str().to_string()));
        out.extend(self.strategy.map(|s| s.as_str().to_string()));
        out.extend(self.fault_category.map(|f| f.as_str().to_string()));
        if !self.ground_truth_summary.trim().is_empty() {
            out.push(self.ground_truth_summary.trim().to_string());
        }
        out
    }
}
