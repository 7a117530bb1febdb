//! Strict conversion of candidate object text into a [`ReasoningTrace`].
//!
//! No field is defaulted. Every error names the offending path.

use serde_json::{Map, Value};

use super::schema::*;
use crate::model::{Artifact, Variant};

/// Identity of the cell a candidate answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceKey {
    pub sample_id: String,
    pub variant: Variant,
    pub model_id: String,
}

fn missing(path: &str) -> TraceError {
    TraceError::MissingField(path.to_string())
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, TraceError> {
    v.as_object().ok_or_else(|| missing(path))
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, TraceError> {
    match obj.get(key) {
        Some(Value::Null) | None => Err(missing(&join(path, key))),
        Some(v) => Ok(v),
    }
}

fn text(obj: &Map<String, Value>, path: &str, key: &str) -> Result<String, TraceError> {
    field(obj, path, key)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| missing(&join(path, key)))
}

fn nonempty_text(obj: &Map<String, Value>, path: &str, key: &str) -> Result<String, TraceError> {
    let t = text(obj, path, key)?;
    if t.trim().is_empty() {
        return Err(missing(&join(path, key)));
    }
    Ok(t)
}

fn boolean(obj: &Map<String, Value>, path: &str, key: &str) -> Result<bool, TraceError> {
    field(obj, path, key)?
        .as_bool()
        .ok_or_else(|| TraceError::BadEnum(join(path, key)))
}

fn unit(obj: &Map<String, Value>, path: &str, key: &str) -> Result<f64, TraceError> {
    let p = join(path, key);
    let x = field(obj, path, key)?
        .as_f64()
        .ok_or_else(|| TraceError::OutOfRange(p.clone()))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(TraceError::OutOfRange(p));
    }
    Ok(x)
}

fn artifact(v: &Value, path: &str) -> Result<Artifact, TraceError> {
    v.as_str()
        .and_then(Artifact::from_alias)
        .ok_or_else(|| TraceError::BadEnum(path.to_string()))
}

fn artifact_list(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Vec<Artifact>, TraceError> {
    let p = join(path, key);
    let arr = field(obj, path, key)?
        .as_array()
        .ok_or_else(|| missing(&p))?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, v) in arr.iter().enumerate() {
        let a = artifact(v, &format!("{p}[{i}]"))?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

fn score(
    obj: &Map<String, Value>,
    path: &str,
    key: &str,
    bands: &LabelBands,
    warnings: &mut Vec<String>,
) -> Result<ArtifactScore, TraceError> {
    let p = join(path, key);
    let o = object(field(obj, path, key)?, &p)?;
    let score = unit(o, &p, "score")?;
    let label_text = text(o, &p, "label")?;
    let label = Label::parse(&label_text).ok_or_else(|| TraceError::BadEnum(join(&p, "label")))?;
    let banded = label_of(score, bands)?;
    if banded != label {
        warnings.push(format!("{p}: label {label} disagrees with score {score} ({banded})"));
    }
    Ok(ArtifactScore {
        score,
        label,
        evidence: text(o, &p, "evidence")?,
    })
}

fn assessment(
    root: &Map<String, Value>,
    bands: &LabelBands,
    warnings: &mut Vec<String>,
) -> Result<QualityAssessment, TraceError> {
    let p = "assessment";
    let o = object(field(root, "", p)?, p)?;
    Ok(QualityAssessment {
        javadoc: score(o, p, "javadoc", bands, warnings)?,
        signature: score(o, p, "signature", bands, warnings)?,
        mut_: score(o, p, "mut", bands, warnings)?,
        test_prefix: score(o, p, "test_prefix", bands, warnings)?,
        overall: score(o, p, "overall", bands, warnings)?,
    })
}

fn prioritization(root: &Map<String, Value>) -> Result<SourcePrioritization, TraceError> {
    let p = "prioritization";
    let o = object(field(root, "", p)?, p)?;
    let rp = "prioritization.ranking";
    let arr = field(o, p, "ranking")?.as_array().ok_or_else(|| missing(rp))?;
    if arr.len() < 4 {
        return Err(missing(rp));
    }
    if arr.len() > 4 {
        return Err(TraceError::DuplicateSource(rp.to_string()));
    }
    let mut ranking = Vec::with_capacity(4);
    for (i, v) in arr.iter().enumerate() {
        let ep = format!("{rp}[{i}]");
        let e = object(v, &ep)?;
        let source = artifact(field(e, &ep, "source")?, &join(&ep, "source"))?;
        if ranking.iter().any(|r: &RankEntry| r.source == source) {
            return Err(TraceError::DuplicateSource(join(&ep, "source")));
        }
        let rank = field(e, &ep, "rank")?
            .as_u64()
            .filter(|r| (1..=4).contains(r))
            .ok_or_else(|| TraceError::OutOfRange(join(&ep, "rank")))? as u8;
        if ranking.iter().any(|r: &RankEntry| r.rank == rank) {
            return Err(TraceError::OutOfRange(join(&ep, "rank")));
        }
        ranking.push(RankEntry {
            source,
            rank,
            confidence: unit(e, &ep, "confidence")?,
        });
    }
    ranking.sort_by_key(|r| r.rank);
    Ok(SourcePrioritization { ranking })
}

fn pair(o: &Map<String, Value>, path: &str, key: &str) -> Result<PairVerdict, TraceError> {
    let p = join(path, key);
    let e = object(field(o, path, key)?, &p)?;
    let verdict = Verdict::parse(&text(e, &p, "verdict")?).ok_or_else(|| TraceError::BadEnum(join(&p, "verdict")))?;
    let rationale = if verdict == Verdict::Contradictory {
        nonempty_text(e, &p, "rationale")?
    } else {
        text(e, &p, "rationale")?
    };
    Ok(PairVerdict { verdict, rationale })
}

fn consistency(root: &Map<String, Value>) -> Result<ConsistencyReport, TraceError> {
    let p = "consistency";
    let o = object(field(root, "", p)?, p)?;
    let pp = "consistency.pairwise";
    let pw = object(field(o, p, "pairwise")?, pp)?;
    let pairwise = Pairwise {
        javadoc_signature: pair(pw, pp, "javadoc_signature")?,
        javadoc_mut: pair(pw, pp, "javadoc_mut")?,
        javadoc_test_prefix: pair(pw, pp, "javadoc_test_prefix")?,
        signature_mut: pair(pw, pp, "signature_mut")?,
        signature_test_prefix: pair(pw, pp, "signature_test_prefix")?,
        mut_test_prefix: pair(pw, pp, "mut_test_prefix")?,
    };

    let cp = "consistency.identified_conflicts";
    let arr = field(o, p, "identified_conflicts")?
        .as_array()
        .ok_or_else(|| missing(cp))?;
    let mut identified_conflicts = Vec::with_capacity(arr.len());
    for (i, v) in arr.iter().enumerate() {
        let ep = format!("{cp}[{i}]");
        let e = object(v, &ep)?;
        let artifacts = artifact_list(e, &ep, "artifacts")?;
        if artifacts.is_empty() {
            return Err(missing(&join(&ep, "artifacts")));
        }
        identified_conflicts.push(Conflict {
            artifacts,
            description: nonempty_text(e, &ep, "description")?,
        });
    }

    let ip = "consistency.inconsistency";
    let inc = object(field(o, p, "inconsistency")?, ip)?;
    let has_inconsistency = boolean(inc, ip, "has_inconsistency")?;
    let affected_artifacts = artifact_list(inc, ip, "affected_artifacts")?;
    let description = if has_inconsistency {
        if affected_artifacts.is_empty() {
            return Err(missing(&join(ip, "affected_artifacts")));
        }
        nonempty_text(inc, ip, "description")?
    } else {
        text(inc, ip, "description")?
    };

    let ap = "consistency.anomaly";
    let an = object(field(o, p, "anomaly")?, ap)?;
    Ok(ConsistencyReport {
        pairwise,
        identified_conflicts,
        inconsistency: Inconsistency {
            has_inconsistency,
            affected_artifacts,
            description,
        },
        anomaly: Anomaly {
            detected: boolean(an, ap, "detected")?,
            description: text(an, ap, "description")?,
        },
        behavioral_hypothesis: text(o, p, "behavioral_hypothesis")?,
    })
}

fn metadata(root: &Map<String, Value>) -> Result<TraceMetadata, TraceError> {
    let p = "metadata";
    let o = object(field(root, "", p)?, p)?;
    Ok(TraceMetadata {
        assumptions: text(o, p, "assumptions")?,
        limitations: text(o, p, "limitations")?,
        uncertainty: text(o, p, "uncertainty")?,
    })
}

pub fn validate_trace(candidate: &str, key: &TraceKey, bands: &LabelBands) -> Result<ReasoningTrace, TraceError> {
    let value: Value =
        serde_json::from_str(candidate).map_err(|_| TraceError::ParseFailure(candidate.to_string()))?;
    let root = value
        .as_object()
        .ok_or_else(|| TraceError::ParseFailure(candidate.to_string()))?;
    let mut warnings = Vec::new();
    let assessment = assessment(root, bands, &mut warnings)?;
    let prioritization = prioritization(root)?;
    let consistency = consistency(root)?;
    let metadata = metadata(root)?;
    let overall_confidence = unit(root, "", "overall_confidence")?;
    Ok(ReasoningTrace {
        sample_id: key.sample_id.clone(),
        variant: key.variant,
        model_id: key.model_id.clone(),
        assessment,
        prioritization,
        consistency,
        metadata,
        overall_confidence,
        warnings,
    })
}
