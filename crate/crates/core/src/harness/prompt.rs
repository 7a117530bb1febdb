//! The blind elicitation prompt and its provenance-leak scanner.

use sha2::{Digest, Sha256};

use crate::corpus::lex::is_ident_byte;
use crate::model::ArtifactBundle;
use crate::perturb::PerturbationRecord;

pub const SYSTEM_PROMPT: &str = r#"You are a careful software engineering reviewer. You receive four artifacts that describe one Java method: its Javadoc, its signature, the method under test (MUT) and a unit-test prefix (setup and invocation, without assertions).

Rules:
1. No artifact is ground truth a priori. Judge each one on its own merits and against the others.
2. Produce every component listed below. Do not omit fields; use empty strings where you have nothing to say.
3. Scores are real numbers in [0, 1] with two decimals. Labels: LOW below 0.40, MEDIUM from 0.40 to below 0.70, HIGH from 0.70.
4. The prioritization is a total order over the four sources: each of JAVADOC, SIGNATURE, MUT, TEST_PREFIX appears exactly once, rank 1 is the most reliable.
5. Reply with a single valid JSON object and nothing else: no prose, no code fences.

Required object:
{
  "assessment": {
    "javadoc":     {"score": 0.00, "label": "LOW|MEDIUM|HIGH", "evidence": "..."},
    "signature":   {"score": 0.00, "label": "...", "evidence": "..."},
    "mut":         {"score": 0.00, "label": "...", "evidence": "..."},
    "test_prefix": {"score": 0.00, "label": "...", "evidence": "..."},
    "overall":     {"score": 0.00, "label": "...", "evidence": "..."}
  },
  "prioritization": {
    "ranking": [{"source": "JAVADOC|SIGNATURE|MUT|TEST_PREFIX", "rank": 1, "confidence": 0.00}, ... four entries]
  },
  "consistency": {
    "pairwise": {
      "javadoc_signature":     {"verdict": "CONSISTENT|CONTRADICTORY|INCOMPLETE", "rationale": "..."},
      "javadoc_mut":           {"verdict": "...", "rationale": "..."},
      "javadoc_test_prefix":   {"verdict": "...", "rationale": "..."},
      "signature_mut":         {"verdict": "...", "rationale": "..."},
      "signature_test_prefix": {"verdict": "...", "rationale": "..."},
      "mut_test_prefix":       {"verdict": "...", "rationale": "..."}
    },
    "identified_conflicts": [{"artifacts": ["JAVADOC", "MUT"], "description": "..."}],
    "inconsistency": {"has_inconsistency": false, "affected_artifacts": [], "description": ""},
    "anomaly": {"detected": false, "description": ""},
    "behavioral_hypothesis": "what the method actually does"
  },
  "metadata": {"assumptions": "...", "limitations": "...", "uncertainty": "..."},
  "overall_confidence": 0.00
}

A CONTRADICTORY verdict, an identified conflict, or a flagged inconsistency must carry a non-empty explanation."#;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindPrompt {
    pub system: String,
    pub user: String,
}

impl BlindPrompt {
    pub fn sha256(&self) -> String {
        prompt_sha256(&self.system, &self.user)
    }
}

pub fn prompt_sha256(system: &str, user: &str) -> String {
    let mut h = Sha256::new();
    h.update(system.as_bytes());
    h.update([0]);
    h.update(user.as_bytes());
    hex::encode(h.finalize())
}

pub fn render_user_text(bundle: &ArtifactBundle) -> String {
    format!(
        "Analyze the following artifact bundle.\n\n### Javadoc\n{}\n\n### Signature\n{}\n\n### MUT\n{}\n\n### Test Prefix\n{}\n",
        bundle.javadoc, bundle.signature, bundle.mut_body, bundle.test_prefix
    )
}

/// Whether `needle` occurs in `haystack` as a whole word (case-sensitive).
fn whole_word_hits(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let hb = haystack.as_bytes();
    let nb = needle.as_bytes();
    haystack.match_indices(needle).any(|(p, _)| {
        let before_ok = p == 0 || !is_ident_byte(hb[p - 1]) || !is_ident_byte(nb[0]);
        let end = p + needle.len();
        let after_ok = end >= hb.len() || !is_ident_byte(hb[end]) || !is_ident_byte(nb[nb.len() - 1]);
        before_ok && after_ok
    })
}

/// Provenance strings present in `user` but absent from the clean baseline
/// prompt of the same sample.
pub fn scan_leaks(user: &str, provenance: &[String], baseline: &str) -> Vec<String> {
    provenance
        .iter()
        .filter(|p| whole_word_hits(user, p) && !whole_word_hits(baseline, p))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("LEAK_ABORT: prompt reveals {0:?}")]
pub struct LeakAbort(pub Vec<String>);

/// Renders the prompt for `record`, refusing if it would reveal provenance.
/// `base_bundle` is the clean bundle of the same sample.
pub fn render_blind_prompt(record: &PerturbationRecord, base_bundle: &ArtifactBundle) -> Result<BlindPrompt, LeakAbort> {
    let user = render_user_text(&record.bundle);
    let leaks = scan_leaks(&user, &record.provenance_strings(), &render_user_text(base_bundle));
    if !leaks.is_empty() {
        return Err(LeakAbort(leaks));
    }
    Ok(BlindPrompt {
        system: SYSTEM_PROMPT.to_string(),
        user,
    })
}
