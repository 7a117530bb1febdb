use std::collections::HashMap;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::{canned_mutation, oracle_trace, AuditorProfile};
use crate::endpoint::{ChatEndpoint, ChatRequest, EndpointError};
use crate::harness::prompt::render_user_text;
use crate::model::{ArtifactBundle, Variant};
use crate::perturb::mutation::{build_mutation_request, MUTATION_SYSTEM_PROMPT};
use crate::perturb::{MutationPlan, PerturbationRecord, VariantMatrix};

const RETRY_NOTE: &str = "\nYour previous reply was rejected";

fn digest(text: &str) -> [u8; 32] {
    Sha256::digest(text.as_bytes()).into()
}

/// Answers prompts it has been registered for. Trace prompts are matched by
/// the hash of their user text; identical prompts resolve to the first
/// record in variant order, so a removal that changes nothing reads as BASE.
pub struct AuditorEndpoint {
    profile: AuditorProfile,
    traces: HashMap<[u8; 32], PerturbationRecord>,
    mutations: HashMap<[u8; 32], (ArtifactBundle, MutationPlan)>,
}

impl AuditorEndpoint {
    pub fn new(profile: AuditorProfile) -> AuditorEndpoint {
        AuditorEndpoint {
            profile,
            traces: HashMap::new(),
            mutations: HashMap::new(),
        }
    }

    pub fn for_matrix(profile: AuditorProfile, matrix: &VariantMatrix) -> AuditorEndpoint {
        let mut e = AuditorEndpoint::new(profile);
        e.add_matrix(matrix);
        e
    }

    pub fn add_matrix(&mut self, matrix: &VariantMatrix) {
        for variant in Variant::ALL {
            for r in matrix.datasets.get(&variant).into_iter().flatten() {
                self.traces.entry(digest(&render_user_text(&r.bundle))).or_insert_with(|| r.clone());
            }
        }
    }

    pub fn add_mutation(&mut self, bundle: &ArtifactBundle, plan: &MutationPlan) {
        if let Ok(user) = build_mutation_request(bundle, plan) {
            self.mutations.insert(digest(&user), (bundle.clone(), plan.clone()));
        }
    }

    pub fn profile(&self) -> &AuditorProfile {
        &self.profile
    }
}

impl ChatEndpoint for AuditorEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        if self.profile.delay_ms > 0 {
            std::thread::sleep(Duration::from_millis(self.profile.delay_ms));
        }
        if request.system == MUTATION_SYSTEM_PROMPT {
            let user = request.user.split(RETRY_NOTE).next().unwrap_or_default();
            return self
                .mutations
                .get(&digest(user))
                .map(|(bundle, plan)| canned_mutation(bundle, plan))
                .ok_or_else(|| EndpointError::Fatal("auditor has no plan for this mutation prompt".into()));
        }
        self.traces
            .get(&digest(&request.user))
            .map(|r| oracle_trace(r, &self.profile))
            .ok_or_else(|| EndpointError::Fatal("auditor has no record for this prompt".into()))
    }
}
