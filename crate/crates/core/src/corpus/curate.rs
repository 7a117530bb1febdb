//! Base-sample filtering: size bounds, nontriviality, declaration kind,
//! documentation quality, test-prefix presence and deduplication.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::javadoc::{check_javadoc_rules, DocComment, DocViolation};
use super::lex;
use super::measure::{classify_triviality, count_executable_lines};
use super::signature::parse_signature;
use crate::model::ArtifactBundle;

pub const MIN_EXECUTABLE_LINES: usize = 8;
pub const MAX_EXECUTABLE_LINES: usize = 60;
pub const MIN_TEST_PREFIX_CHARS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CurationRule {
    #[serde(rename = "malformed-signature")]
    MalformedSignature,
    #[serde(rename = "line-count")]
    LineCount,
    #[serde(rename = "trivial-body")]
    TrivialBody,
    #[serde(rename = "constructor")]
    Constructor,
    #[serde(rename = "entry-point")]
    EntryPoint,
    #[serde(rename = "trivial-accessor")]
    TrivialAccessor,
    #[serde(rename = "inline-comment")]
    InlineComment,
    #[serde(rename = "extraction-artifact")]
    ExtractionArtifact,
    #[serde(rename = "contains-inheritDoc")]
    ContainsInheritDoc,
    #[serde(rename = "short-description")]
    ShortDescription,
    #[serde(rename = "missing-@return")]
    MissingReturn,
    #[serde(rename = "missing-@param")]
    MissingParam,
    #[serde(rename = "tag-only")]
    TagOnly,
    #[serde(rename = "non-english")]
    NonEnglish,
    #[serde(rename = "usage-warning-only")]
    UsageWarningOnly,
    #[serde(rename = "short-test-prefix")]
    ShortTestPrefix,
    #[serde(rename = "duplicate")]
    Duplicate,
}

impl From<DocViolation> for CurationRule {
    fn from(v: DocViolation) -> Self {
        match v {
            DocViolation::ContainsInheritDoc => CurationRule::ContainsInheritDoc,
            DocViolation::ShortDescription => CurationRule::ShortDescription,
            DocViolation::MissingReturn => CurationRule::MissingReturn,
            DocViolation::MissingParam => CurationRule::MissingParam,
            DocViolation::TagOnly => CurationRule::TagOnly,
            DocViolation::NonEnglish => CurationRule::NonEnglish,
            DocViolation::UsageWarningOnly => CurationRule::UsageWarningOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Measured {
    pub executable_line_count: usize,
    pub control_flow_count: usize,
    pub assignment_count: usize,
    pub call_count: usize,
    pub description_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationVerdict {
    pub sample_id: String,
    pub accepted: bool,
    pub failed_rules: Vec<CurationRule>,
    pub measured: Measured,
}

const ACCESSOR_PREFIXES: &[&str] = &["get", "is", "has", "set"];

fn looks_like_accessor(name: &str) -> bool {
    ACCESSOR_PREFIXES.iter().any(|p| {
        name.strip_prefix(p)
            .and_then(|rest| rest.chars().next())
            .is_some_and(|c| c.is_uppercase())
    })
}

/// Text that belongs to another declaration or a neighbouring doc block.
fn has_extraction_artifact(bundle: &ArtifactBundle) -> bool {
    let masked = lex::mask(&bundle.mut_body);
    let trailing_code = match lex::outer_braces(&masked.code) {
        Some((_, close)) => !masked.code[close + 1..].trim().is_empty(),
        None => true,
    };
    let embedded_doc = bundle.mut_body.contains("/**");
    let doc = bundle.javadoc.trim();
    let doc_spill = doc.matches("/**").count() > 1
        || doc
            .rfind("*/")
            .is_some_and(|p| !doc[p + 2..].trim().is_empty());
    trailing_code || embedded_doc || doc_spill
}

/// Rules that a single candidate fails, ignoring deduplication.
fn evaluate(bundle: &ArtifactBundle) -> (Vec<CurationRule>, Measured) {
    let mut failed = Vec::new();
    let lines = count_executable_lines(&bundle.mut_body);
    let triv = classify_triviality(&bundle.mut_body);
    let doc = DocComment::parse(&bundle.javadoc);
    let measured = Measured {
        executable_line_count: lines,
        control_flow_count: triv.control_flow_count,
        assignment_count: triv.assignment_count,
        call_count: triv.call_count,
        description_length: doc.description().chars().count(),
    };

    match parse_signature(&bundle.signature) {
        None => failed.push(CurationRule::MalformedSignature),
        Some(sig) => {
            if sig.is_constructor() {
                failed.push(CurationRule::Constructor);
            }
            if sig.is_entry_point() {
                failed.push(CurationRule::EntryPoint);
            }
            if looks_like_accessor(&sig.name) && !triv.nontrivial {
                failed.push(CurationRule::TrivialAccessor);
            }
        }
    }
    if !(MIN_EXECUTABLE_LINES..=MAX_EXECUTABLE_LINES).contains(&lines) {
        failed.push(CurationRule::LineCount);
    }
    if !triv.nontrivial {
        failed.push(CurationRule::TrivialBody);
    }
    if lex::mask(&bundle.mut_body).has_comment() {
        failed.push(CurationRule::InlineComment);
    }
    if has_extraction_artifact(bundle) {
        failed.push(CurationRule::ExtractionArtifact);
    }
    failed.extend(
        check_javadoc_rules(&bundle.javadoc, &bundle.signature)
            .into_iter()
            .map(CurationRule::from),
    );
    if bundle.test_prefix.trim().chars().count() < MIN_TEST_PREFIX_CHARS {
        failed.push(CurationRule::ShortTestPrefix);
    }
    failed.sort();
    failed.dedup();
    (failed, measured)
}

/// Filters candidates down to the clean base set.
///
/// Verdicts come back in input order, one per candidate. Among candidates
/// that pass every other rule, the first occurrence of each
/// `(mut_body, javadoc)` pair is kept and later copies fail as duplicates.
pub fn curate(candidates: &[ArtifactBundle]) -> (Vec<ArtifactBundle>, Vec<CurationVerdict>) {
    let mut seen: HashSet<(&str, &str)> = HashSet::new();
    let mut accepted = Vec::new();
    let mut verdicts = Vec::with_capacity(candidates.len());
    for bundle in candidates {
        let (mut failed, measured) = evaluate(bundle);
        if failed.is_empty() && !seen.insert((bundle.mut_body.as_str(), bundle.javadoc.as_str())) {
            failed.push(CurationRule::Duplicate);
        }
        let ok = failed.is_empty();
        if ok {
            accepted.push(bundle.clone());
        }
        verdicts.push(CurationVerdict {
            sample_id: bundle.sample_id.clone(),
            accepted: ok,
            failed_rules: failed,
            measured,
        });
    }
    (accepted, verdicts)
}
