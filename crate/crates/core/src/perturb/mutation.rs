//! Mutation prompts, reply validation and the retry loop around them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::record::PerturbationRecord;
use crate::corpus::lex;
use crate::endpoint::{complete_with_retry, Backoff, ChatEndpoint, ChatRequest, EndpointError};
use crate::model::{Artifact, ArtifactBundle, FaultCategory, Severity, Strategy, Variant};
use crate::trace::repair_raw_output;

/// One mutation cell: which family, tier and side to mutate for a sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationPlan {
    pub sample_id: String,
    pub variant: Variant,
    pub severity: Severity,
    pub strategy: Option<Strategy>,
}

impl MutationPlan {
    /// Artifacts the reply must change, in canonical order.
    pub fn targets(&self) -> Vec<Artifact> {
        match (self.variant, self.strategy) {
            (Variant::DocBug, _) => vec![Artifact::Javadoc],
            (Variant::MutBug, _) => vec![Artifact::Mut],
            (Variant::Contradiction, Some(s)) => [Artifact::Javadoc, Artifact::Mut]
                .into_iter()
                .filter(|a| s.mutates(*a))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn allows(&self, category: FaultCategory) -> bool {
        let t = self.targets();
        (category.is_code_fault() && t.contains(&Artifact::Mut))
            || (!category.is_code_fault() && t.contains(&Artifact::Javadoc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MutationErrorKind {
    InvalidRequest,
    SignatureChanged,
    NoEffectiveChange,
    MarkerLeak,
    MissingMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind:?}: {detail}")]
pub struct MutationError {
    pub kind: MutationErrorKind,
    pub detail: String,
    /// The rejected reply text, empty for request errors.
    pub reply: String,
}

fn reject(kind: MutationErrorKind, detail: impl Into<String>, reply: &str) -> MutationError {
    MutationError {
        kind,
        detail: detail.into(),
        reply: reply.to_string(),
    }
}

pub const MUTATION_SYSTEM_PROMPT: &str = "You inject realistic faults into Java method bundles to build an evaluation benchmark. \
You receive a method under test, its signature, its Javadoc and a test prefix, plus instructions on what to change. \
Change only the artifacts you are told to change. Keep every result natural and realistic, as if written by the original developer. \
Reply with a single JSON object and nothing else.";

fn severity_wording(severity: Severity) -> &'static str {
    match severity {
        Severity::Heavy => "HEAVY: the fault must be explicit and easy to observe on ordinary inputs.",
        Severity::Normal => "NORMAL: the fault should only show up for particular inputs or at boundary values.",
        Severity::Subtle => "SUBTLE: the fault should be a minimal deviation that only affects a corner case.",
    }
}

fn target_wording(plan: &MutationPlan) -> &'static str {
    match (plan.variant, plan.strategy) {
        (Variant::DocBug, _) => {
            "Introduce a documentation fault: edit the Javadoc so it misdescribes the method. Leave the method body unchanged."
        }
        (Variant::MutBug, _) => {
            "Introduce an implementation fault: edit the method body so it no longer matches its Javadoc. Leave the Javadoc unchanged."
        }
        (_, Some(Strategy::MutOnly)) => {
            "Create a contradiction between the Javadoc and the method by editing only the method body."
        }
        (_, Some(Strategy::DocstringOnly)) => {
            "Create a contradiction between the Javadoc and the method by editing only the Javadoc."
        }
        _ => "Create a contradiction between the Javadoc and the method by editing both the Javadoc and the method body.",
    }
}

fn category_list(plan: &MutationPlan) -> String {
    FaultCategory::ALL
        .into_iter()
        .filter(|c| plan.allows(*c))
        .map(|c| c.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders the user text for one mutation cell.
pub fn build_mutation_request(bundle: &ArtifactBundle, plan: &MutationPlan) -> Result<String, MutationError> {
    let bad = |d: &str| reject(MutationErrorKind::InvalidRequest, d, "");
    if !plan.variant.is_mutation() {
        return Err(bad("variant is not a mutation family"));
    }
    match (plan.variant, plan.strategy) {
        (Variant::Contradiction, None) => return Err(bad("contradiction requires a strategy")),
        (Variant::DocBug | Variant::MutBug, Some(_)) => {
            return Err(bad("strategy applies to contradictions only"))
        }
        _ => {}
    }
    let targets = plan.targets();
    let mut fields = Vec::new();
    if targets.contains(&Artifact::Javadoc) {
        fields.push("  \"mutated_javadoc\": the complete edited Javadoc comment, delimiters included,");
    }
    if targets.contains(&Artifact::Mut) {
        fields.push("  \"mutated_mut\": the complete edited method, declaration line included,");
    }
    Ok(format!(
        "{target}\n\
Severity tier {severity}\n\n\
Constraints:\n\
- The method signature is held fixed: the declaration must stay byte-for-byte identical.\n\
- The result must look natural. Add no comments, markers or formatting cues that reveal the change.\n\
- The edited artifact must actually differ from the original.\n\n\
### Javadoc\n{javadoc}\n\n\
### Signature\n{signature}\n\n\
### Method under test\n{mut_body}\n\n\
### Test prefix\n{test_prefix}\n\n\
Reply with one JSON object with these keys:\n\
{fields}\n\
  \"fault_category\": one of {categories},\n\
  \"ground_truth_summary\": one line stating the injected fault,\n\
  \"change_description\": a short description of the edit,\n\
  \"difficulty\": \"{tier}\"\n",
        target = target_wording(plan),
        severity = severity_wording(plan.severity),
        javadoc = bundle.javadoc,
        signature = bundle.signature,
        mut_body = bundle.mut_body,
        test_prefix = bundle.test_prefix,
        fields = fields.join("\n"),
        categories = category_list(plan),
        tier = plan.severity.as_str(),
    ))
}

const MARKER_LEXICON: &[&str] = &["bug", "fixme", "todo", "inject", "mutat"];

fn lexicon_hits(text: &str) -> usize {
    let lower = text.to_lowercase();
    MARKER_LEXICON.iter().map(|m| lower.matches(m).count()).sum()
}

fn comment_tokens(artifact: Artifact, text: &str) -> usize {
    match artifact {
        Artifact::Mut => lex::mask(text).comments.len(),
        // the doc comment itself is one block; count nested openers only
        _ => {
            let inner = text.trim().strip_prefix("/**").unwrap_or(text);
            inner.matches("//").count() + inner.matches("/*").count() + inner.matches("<!--").count()
        }
    }
}

/// Declaration text: everything before the body brace.
fn declaration(mut_body: &str) -> &str {
    let masked = lex::mask(mut_body);
    match lex::outer_braces(&masked.code) {
        Some((open, _)) => mut_body[..open].trim(),
        None => mut_body.trim(),
    }
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Checks a raw mutation reply against its base bundle and plan.
pub fn validate_mutation(base: &ArtifactBundle, plan: &MutationPlan, reply: &str) -> Result<PerturbationRecord, MutationError> {
    use MutationErrorKind::*;
    let err = |k, d: String| reject(k, d, reply);
    let text = repair_raw_output(reply).map_err(|_| err(MissingMetadata, "reply is not a JSON object".into()))?;
    let v: Value = serde_json::from_str(&text).map_err(|_| err(MissingMetadata, "reply is not a JSON object".into()))?;
    let str_field = |k: &str| v.get(k).and_then(Value::as_str).map(str::to_string);

    let category_text = str_field("fault_category").ok_or_else(|| err(MissingMetadata, "fault_category".into()))?;
    let category: FaultCategory = category_text
        .parse()
        .map_err(|_| err(MissingMetadata, format!("fault_category `{category_text}`")))?;
    if !plan.allows(category) {
        return Err(err(MissingMetadata, format!("fault_category {category} does not fit the target")));
    }
    let summary = collapse(&str_field("ground_truth_summary").unwrap_or_default());
    if summary.is_empty() {
        return Err(err(MissingMetadata, "ground_truth_summary".into()));
    }
    match str_field("difficulty") {
        Some(d) if d.trim().eq_ignore_ascii_case(plan.severity.as_str()) => {}
        Some(d) => return Err(err(MissingMetadata, format!("difficulty `{d}` differs from {}", plan.severity))),
        None => return Err(err(MissingMetadata, "difficulty".into())),
    }
    if let Some(sig) = str_field("signature") {
        if sig != base.signature {
            return Err(err(SignatureChanged, "signature field differs".into()));
        }
    }

    let mut bundle = base.clone();
    let targets = plan.targets();
    for &artifact in &targets {
        let (key, original) = match artifact {
            Artifact::Javadoc => ("mutated_javadoc", &base.javadoc),
            _ => ("mutated_mut", &base.mut_body),
        };
        let mutated = str_field(key).ok_or_else(|| err(MissingMetadata, key.into()))?;
        if artifact == Artifact::Mut && declaration(&mutated) != declaration(original) {
            return Err(err(SignatureChanged, "method declaration differs".into()));
        }
        if collapse(&mutated) == collapse(original) {
            return Err(err(NoEffectiveChange, format!("{key} equals the base text")));
        }
        if lexicon_hits(&mutated) > lexicon_hits(original) {
            return Err(err(MarkerLeak, format!("{key} introduces a marker word")));
        }
        if comment_tokens(artifact, &mutated) > comment_tokens(artifact, original) {
            return Err(err(MarkerLeak, format!("{key} introduces a comment")));
        }
        match artifact {
            Artifact::Javadoc => bundle.javadoc = mutated,
            _ => bundle.mut_body = mutated,
        }
    }
    Ok(PerturbationRecord {
        sample_id: base.sample_id.clone(),
        variant: plan.variant,
        severity: Some(plan.severity),
        strategy: plan.strategy,
        fault_category: Some(category),
        affected_artifacts: targets,
        ground_truth_summary: summary,
        change_description: collapse(&str_field("change_description").unwrap_or_default()),
        bundle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSettings {
    pub model_id: String,
    pub max_tokens: u32,
    /// Validation attempts per cell.
    pub attempts: u32,
    pub transport_retries: u32,
    pub backoff: Backoff,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MutationFailure {
    Endpoint { detail: String },
    Rejected { rejections: Vec<MutationError> },
}

/// Requests a mutation until one validates or attempts run out. Each retry
/// names the previous rejection in the prompt.
pub fn mutate_with_retry(
    endpoint: &dyn ChatEndpoint,
    base: &ArtifactBundle,
    plan: &MutationPlan,
    settings: &MutationSettings,
) -> Result<PerturbationRecord, MutationFailure> {
    let user = build_mutation_request(base, plan).map_err(|e| MutationFailure::Rejected { rejections: vec![e] })?;
    let mut rejections: Vec<MutationError> = Vec::new();
    for _ in 0..settings.attempts.max(1) {
        let mut prompt = user.clone();
        if let Some(last) = rejections.last() {
            prompt.push_str(&format!("\nYour previous reply was rejected ({:?}: {}). Fix this.\n", last.kind, last.detail));
        }
        let request = ChatRequest {
            model_id: settings.model_id.clone(),
            system: MUTATION_SYSTEM_PROMPT.to_string(),
            user: prompt,
            temperature: 0.0,
            max_tokens: settings.max_tokens,
        };
        let reply = complete_with_retry(endpoint, &request, settings.transport_retries, &settings.backoff)
            .map_err(|e: EndpointError| MutationFailure::Endpoint { detail: e.to_string() })?;
        match validate_mutation(base, plan, &reply) {
            Ok(record) => return Ok(record),
            Err(e) => rejections.push(e),
        }
    }
    Err(MutationFailure::Rejected { rejections })
}
