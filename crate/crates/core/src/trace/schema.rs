use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::model::{Artifact, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Low,
    Medium,
    High,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Low => "LOW",
            Label::Medium => "MEDIUM",
            Label::High => "HIGH",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        [Label::Low, Label::Medium, Label::High]
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

/// Score cut points: LOW below `medium`, HIGH at or above `high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelBands {
    pub medium: f64,
    pub high: f64,
}

impl Default for LabelBands {
    fn default() -> Self {
        LabelBands {
            medium: 0.40,
            high: 0.70,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Contradictory,
    Incomplete,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::Contradictory => "CONTRADICTORY",
            Verdict::Incomplete => "INCOMPLETE",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        [Verdict::Consistent, Verdict::Contradictory, Verdict::Incomplete]
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactScore {
    pub score: f64,
    pub label: Label,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityAssessment {
    pub javadoc: ArtifactScore,
    pub signature: ArtifactScore,
    #[serde(rename = "mut")]
    pub mut_: ArtifactScore,
    pub test_prefix: ArtifactScore,
    pub overall: ArtifactScore,
}

/// Assessment dimensions in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Dimension {
    Javadoc,
    Signature,
    Mut,
    TestPrefix,
    Overall,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Javadoc,
        Dimension::Signature,
        Dimension::Mut,
        Dimension::TestPrefix,
        Dimension::Overall,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Dimension::Javadoc => "javadoc",
            Dimension::Signature => "signature",
            Dimension::Mut => "mut",
            Dimension::TestPrefix => "test_prefix",
            Dimension::Overall => "overall",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Javadoc => "JAVADOC",
            Dimension::Signature => "SIGNATURE",
            Dimension::Mut => "MUT",
            Dimension::TestPrefix => "TEST_PREFIX",
            Dimension::Overall => "OVERALL",
        }
    }
}

impl QualityAssessment {
    pub fn get(&self, d: Dimension) -> &ArtifactScore {
        match d {
            Dimension::Javadoc => &self.javadoc,
            Dimension::Signature => &self.signature,
            Dimension::Mut => &self.mut_,
            Dimension::TestPrefix => &self.test_prefix,
            Dimension::Overall => &self.overall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub source: Artifact,
    /// 1 is most reliable.
    pub rank: u8,
    pub confidence: f64,
}

/// Entries sorted by rank, each source exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePrioritization {
    pub ranking: Vec<RankEntry>,
}

impl SourcePrioritization {
    pub fn rank_of(&self, source: Artifact) -> u8 {
        self.ranking
            .iter()
            .find(|e| e.source == source)
            .map(|e| e.rank)
            .expect("validated ranking covers every source")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub verdict: Verdict,
    pub rationale: String,
}

pub const PAIR_KEYS: [(&str, Artifact, Artifact); 6] = [
    ("javadoc_signature", Artifact::Javadoc, Artifact::Signature),
    ("javadoc_mut", Artifact::Javadoc, Artifact::Mut),
    ("javadoc_test_prefix", Artifact::Javadoc, Artifact::TestPrefix),
    ("signature_mut", Artifact::Signature, Artifact::Mut),
    ("signature_test_prefix", Artifact::Signature, Artifact::TestPrefix),
    ("mut_test_prefix", Artifact::Mut, Artifact::TestPrefix),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    pub javadoc_signature: PairVerdict,
    pub javadoc_mut: PairVerdict,
    pub javadoc_test_prefix: PairVerdict,
    pub signature_mut: PairVerdict,
    pub signature_test_prefix: PairVerdict,
    pub mut_test_prefix: PairVerdict,
}

impl Pairwise {
    pub fn from_fn(mut f: impl FnMut(Artifact, Artifact) -> PairVerdict) -> Pairwise {
        let [a, b, c, d, e, g] = PAIR_KEYS.map(|(_, x, y)| f(x, y));
        Pairwise {
            javadoc_signature: a,
            javadoc_mut: b,
            javadoc_test_prefix: c,
            signature_mut: d,
            signature_test_prefix: e,
            mut_test_prefix: g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub artifacts: Vec<Artifact>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inconsistency {
    pub has_inconsistency: bool,
    pub affected_artifacts: Vec<Artifact>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub detected: bool,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub pairwise: Pairwise,
    pub identified_conflicts: Vec<Conflict>,
    pub inconsistency: Inconsistency,
    pub anomaly: Anomaly,
    pub behavioral_hypothesis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub assumptions: String,
    pub limitations: String,
    pub uncertainty: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningTrace {
    pub sample_id: String,
    pub variant: Variant,
    pub model_id: String,
    pub assessment: QualityAssessment,
    pub prioritization: SourcePrioritization,
    pub consistency: ConsistencyReport,
    pub metadata: TraceMetadata,
    pub overall_confidence: f64,
    /// Non-fatal observations, such as labels outside their score band.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ReasoningTrace {
    /// The model-facing object: the five top-level wire keys only.
    pub fn to_wire(&self) -> Value {
        json!({
            "assessment": self.assessment,
            "prioritization": self.prioritization,
            "consistency": self.consistency,
            "metadata": self.metadata,
            "overall_confidence": self.overall_confidence,
        })
    }

    pub fn to_wire_string(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("trace serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", content = "detail", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceError {
    #[error("PARSE_FAILURE")]
    ParseFailure(String),
    #[error("MISSING_FIELD({0})")]
    MissingField(String),
    #[error("OUT_OF_RANGE({0})")]
    OutOfRange(String),
    #[error("DUPLICATE_SOURCE({0})")]
    DuplicateSource(String),
    #[error("BAD_ENUM({0})")]
    BadEnum(String),
}

impl TraceError {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceError::ParseFailure(_) => "PARSE_FAILURE",
            TraceError::MissingField(_) => "MISSING_FIELD",
            TraceError::OutOfRange(_) => "OUT_OF_RANGE",
            TraceError::DuplicateSource(_) => "DUPLICATE_SOURCE",
            TraceError::BadEnum(_) => "BAD_ENUM",
        }
    }
}

pub fn label_of(score: f64, bands: &LabelBands) -> Result<Label, TraceError> {
    if !(0.0..=1.0).contains(&score) {
        return Err(TraceError::OutOfRange(format!("score {score}")));
    }
    Ok(if score < bands.medium {
        Label::Low
    } else if score < bands.high {
        Label::Medium
    } else {
        Label::High
    })
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_bands() {
        let b = LabelBands::default();
        assert_eq!(label_of(0.0, &b), Ok(Label::Low));
        assert_eq!(label_of(0.3999, &b), Ok(Label::Low));
        assert_eq!(label_of(0.40, &b), Ok(Label::Medium));
        assert_eq!(label_of(0.55, &b), Ok(Label::Medium));
        assert_eq!(label_of(0.70, &b), Ok(Label::High));
        assert_eq!(label_of(1.0, &b), Ok(Label::High));
        assert!(matches!(label_of(1.01, &b), Err(TraceError::OutOfRange(_))));
        assert!(matches!(label_of(-0.1, &b), Err(TraceError::OutOfRange(_))));
        assert!(label_of(f64::NAN, &b).is_err());
    }

    #[test]
    fn pairwise_from_fn_follows_key_order() {
        let p = Pairwise::from_fn(|a, b| PairVerdict {
            verdict: Verdict::Consistent,
            rationale: format!("{}_{}", a.key(), b.key()),
        });
        let v = serde_json::to_value(&p).unwrap();
        for (key, _, _) in PAIR_KEYS {
            assert_eq!(v[key]["rationale"], key);
        }
    }
}
