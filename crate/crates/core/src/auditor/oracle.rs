//! Trace generation from provenance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{AuditorMode, AuditorProfile, MalformedKind, ScorePolicy};
use crate::model::{Artifact, Variant};
use crate::perturb::PerturbationRecord;
use crate::trace::{
    label_of, Anomaly, ArtifactScore, Conflict, ConsistencyReport, Inconsistency, LabelBands, PairVerdict, Pairwise,
    QualityAssessment, RankEntry, ReasoningTrace, SourcePrioritization, TraceMetadata, Verdict,
};

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn scored(score: f64, evidence: &str) -> ArtifactScore {
    let score = round2(score.clamp(0.0, 1.0));
    ArtifactScore {
        score,
        label: label_of(score, &LabelBands::default()).expect("clamped"),
        evidence: evidence.to_string(),
    }
}

fn consistent() -> PairVerdict {
    PairVerdict {
        verdict: Verdict::Consistent,
        rationale: String::new(),
    }
}

fn metadata() -> TraceMetadata {
    TraceMetadata {
        assumptions: "The test prefix reflects intended usage.".into(),
        limitations: "No execution; judgement is based on reading the artifacts.".into(),
        uncertainty: String::new(),
    }
}

fn shell(record: &PerturbationRecord, assessment: QualityAssessment, ranking: Vec<RankEntry>, consistency: ConsistencyReport, confidence: f64) -> ReasoningTrace {
    ReasoningTrace {
        sample_id: record.sample_id.clone(),
        variant: record.variant,
        model_id: String::new(),
        assessment,
        prioritization: SourcePrioritization { ranking },
        consistency,
        metadata: metadata(),
        overall_confidence: round2(confidence),
        warnings: Vec::new(),
    }
}

/// The artifacts an ORACLE trace lists as affected: the mutated ones, plus
/// MUT whenever the documentation is at fault, since a wrong Javadoc is
/// wrong relative to the implementation it describes.
pub fn oracle_affected(record: &PerturbationRecord) -> Vec<Artifact> {
    let faulty = record.faulty_artifacts();
    let mut out: Vec<Artifact> = faulty.to_vec();
    if faulty.contains(&Artifact::Javadoc) && !out.contains(&Artifact::Mut) {
        out.push(Artifact::Mut);
    }
    out.sort();
    out
}

fn oracle(record: &PerturbationRecord, policy: &ScorePolicy) -> ReasoningTrace {
    let faulty = record.faulty_artifacts();
    let penalty = record.severity.map_or(0.0, |s| policy.penalty(s));
    let score_for = |a: Artifact| {
        if faulty.contains(&a) {
            policy.base - penalty
        } else if a == Artifact::Javadoc && record.variant.is_removal() {
            policy.base - policy.removal_penalty
        } else {
            policy.base
        }
    };
    let overall = if faulty.is_empty() { policy.base } else { policy.base - penalty };
    let summary = record.ground_truth_summary.as_str();
    let evidence = |a: Artifact| if faulty.contains(&a) { summary } else { "No issues found." };
    let assessment = QualityAssessment {
        javadoc: scored(score_for(Artifact::Javadoc), evidence(Artifact::Javadoc)),
        signature: scored(score_for(Artifact::Signature), evidence(Artifact::Signature)),
        mut_: scored(score_for(Artifact::Mut), evidence(Artifact::Mut)),
        test_prefix: scored(score_for(Artifact::TestPrefix), evidence(Artifact::TestPrefix)),
        overall: scored(overall, if faulty.is_empty() { "The artifacts agree." } else { summary }),
    };
    // clean sources first in a fixed order, faulty ones last
    let order = [Artifact::Signature, Artifact::TestPrefix, Artifact::Javadoc, Artifact::Mut];
    let mut sources: Vec<Artifact> = order.iter().copied().filter(|a| !faulty.contains(a)).collect();
    sources.extend(order.iter().copied().filter(|a| faulty.contains(a)));
    let ranking = sources
        .iter()
        .enumerate()
        .map(|(i, &a)| RankEntry {
            source: a,
            rank: i as u8 + 1,
            confidence: round2(score_for(a)),
        })
        .collect();

    let fault = !faulty.is_empty();
    let pairwise = Pairwise::from_fn(|a, b| {
        if (a, b) == (Artifact::Javadoc, Artifact::Mut) {
            if fault {
                return PairVerdict {
                    verdict: Verdict::Contradictory,
                    rationale: summary.to_string(),
                };
            }
            if record.variant.is_removal() {
                return PairVerdict {
                    verdict: Verdict::Incomplete,
                    rationale: "The documentation does not fully describe the method.".into(),
                };
            }
        }
        consistent()
    });
    let consistency = ConsistencyReport {
        pairwise,
        identified_conflicts: if fault {
            vec![Conflict {
                artifacts: vec![Artifact::Javadoc, Artifact::Mut],
                description: summary.to_string(),
            }]
        } else {
            Vec::new()
        },
        inconsistency: Inconsistency {
            has_inconsistency: fault,
            affected_artifacts: if fault { oracle_affected(record) } else { Vec::new() },
            description: if fault { summary.to_string() } else { String::new() },
        },
        anomaly: Anomaly {
            detected: false,
            description: String::new(),
        },
        behavioral_hypothesis: "The method behaves as its implementation reads.".into(),
    };
    shell(record, assessment, ranking, consistency, policy.base)
}

fn silent(record: &PerturbationRecord, policy: &ScorePolicy) -> ReasoningTrace {
    let s = |_| scored(policy.base, "No issues found.");
    let assessment = QualityAssessment {
        javadoc: s(()),
        signature: s(()),
        mut_: s(()),
        test_prefix: s(()),
        overall: s(()),
    };
    let ranking = Artifact::ALL
        .iter()
        .enumerate()
        .map(|(i, &a)| RankEntry {
            source: a,
            rank: i as u8 + 1,
            confidence: policy.base,
        })
        .collect();
    let consistency = ConsistencyReport {
        pairwise: Pairwise::from_fn(|_, _| consistent()),
        identified_conflicts: Vec::new(),
        inconsistency: Inconsistency {
            has_inconsistency: false,
            affected_artifacts: Vec::new(),
            description: String::new(),
        },
        anomaly: Anomaly {
            detected: false,
            description: String::new(),
        },
        behavioral_hypothesis: "The method behaves as documented.".into(),
    };
    shell(record, assessment, ranking, consistency, policy.base)
}

/// Stream seeded by (seed, sample_id, variant); the model is not an input.
pub fn random_stream(seed: u64, sample_id: &str, variant: Variant) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(sample_id.as_bytes());
    h.update([0]);
    h.update(variant.as_str().as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn random(record: &PerturbationRecord, p_flag: f64, seed: u64) -> ReasoningTrace {
    let mut rng = random_stream(seed, &record.sample_id, record.variant);
    let pca = rng.random_bool(p_flag);
    let ic = rng.random_bool(p_flag);
    let ir = rng.random_bool(p_flag);
    let score = |rng: &mut ChaCha8Rng| scored(rng.random_range(0.30..=0.95), "Sampled assessment.");
    let assessment = QualityAssessment {
        javadoc: score(&mut rng),
        signature: score(&mut rng),
        mut_: score(&mut rng),
        test_prefix: score(&mut rng),
        overall: score(&mut rng),
    };
    let mut sources = Artifact::ALL.to_vec();
    sources.shuffle(&mut rng);
    let ranking = sources
        .iter()
        .enumerate()
        .map(|(i, &a)| RankEntry {
            source: a,
            rank: i as u8 + 1,
            confidence: round2(rng.random_range(0.30..=0.95)),
        })
        .collect();
    let text = "The documentation and the implementation appear to disagree.";
    let consistency = ConsistencyReport {
        pairwise: Pairwise::from_fn(|a, b| {
            if pca && (a, b) == (Artifact::Javadoc, Artifact::Mut) {
                PairVerdict {
                    verdict: Verdict::Contradictory,
                    rationale: text.into(),
                }
            } else {
                consistent()
            }
        }),
        identified_conflicts: if ic {
            vec![Conflict {
                artifacts: vec![Artifact::Javadoc, Artifact::Mut],
                description: text.into(),
            }]
        } else {
            Vec::new()
        },
        inconsistency: Inconsistency {
            has_inconsistency: ir,
            affected_artifacts: if ir { vec![Artifact::Javadoc, Artifact::Mut] } else { Vec::new() },
            description: if ir { text.into() } else { String::new() },
        },
        anomaly: Anomaly {
            detected: false,
            description: String::new(),
        },
        behavioral_hypothesis: "Unclear.".into(),
    };
    let confidence = rng.random_range(0.30..=0.95);
    shell(record, assessment, ranking, consistency, confidence)
}

const ESCAPE_PLACEHOLDER: &str = "@@ESCAPE@@";

fn malformed(record: &PerturbationRecord, policy: &ScorePolicy, kind: MalformedKind) -> String {
    let mut trace = oracle(record, policy);
    match kind {
        MalformedKind::TagPrefixed => {
            format!("<think>Compare the documented behaviour with the code {{first}}.</think>\n{}", trace.to_wire_string())
        }
        MalformedKind::Truncated => {
            // cut the closing brackets; repair restores them exactly
            let text = trace.to_wire_string();
            let cut = text.trim_end_matches(['}', ']']).len();
            text[..cut].to_string()
        }
        MalformedKind::BadEscape => {
            trace.metadata.assumptions = ESCAPE_PLACEHOLDER.into();
            trace
                .to_wire_string()
                .replace(ESCAPE_PLACEHOLDER, r"Inputs match the pattern \d+ and \p{Alpha}")
        }
    }
}

/// Raw completion text the auditor returns for `record`.
pub fn oracle_trace(record: &PerturbationRecord, profile: &AuditorProfile) -> String {
    match profile.mode {
        AuditorMode::Oracle => oracle(record, &profile.policy).to_wire_string(),
        AuditorMode::Silent => silent(record, &profile.policy).to_wire_string(),
        AuditorMode::Random { p_flag, seed } => random(record, p_flag, seed).to_wire_string(),
        AuditorMode::Malformed { kind } => malformed(record, &profile.policy, kind),
    }
}
