//! Rule-based mutations: one operator flip in the body, one antonym swap in
//! the Javadoc. Replies use the same JSON shape a model would return.

use serde_json::json;

use crate::corpus::lex;
use crate::model::{Artifact, ArtifactBundle, FaultCategory, Severity};
use crate::perturb::MutationPlan;

struct Edit {
    text: String,
    category: FaultCategory,
    summary: String,
    change: String,
}

const FLIPS: &[(&str, &str)] = &[
    ("<=", "<"),
    (">=", ">"),
    ("<", "<="),
    (">", ">="),
    ("==", "!="),
    ("!=", "=="),
    ("&&", "||"),
    ("||", "&&"),
    ("+", "-"),
    ("-", "+"),
];

fn preference(severity: Severity) -> [&'static [&'static str]; 3] {
    const BOUNDARY: &[&str] = &["<=", ">=", "<", ">"];
    const LOGIC: &[&str] = &["==", "!=", "&&", "||"];
    const ARITH: &[&str] = &["+", "-"];
    match severity {
        Severity::Subtle => [BOUNDARY, LOGIC, ARITH],
        Severity::Normal => [LOGIC, BOUNDARY, ARITH],
        Severity::Heavy => [ARITH, LOGIC, BOUNDARY],
    }
}

/// First ` op ` in masked body code, skipping string concatenation.
fn find_spaced(code: &str, from: usize, op: &str) -> Option<usize> {
    let pat = format!(" {op} ");
    code[from..].match_indices(&pat).map(|(i, _)| from + i + 1).find(|&p| {
        let prev = code[..p].trim_end().bytes().last();
        let next = code[p + op.len()..].trim_start().bytes().next();
        let quoted = prev == Some(b'"') || next == Some(b'"');
        !(op == "+" && quoted)
    })
}

fn mutate_code(body: &str, severity: Severity) -> Option<Edit> {
    let masked = lex::mask(body);
    let (open, _) = lex::outer_braces(&masked.code)?;
    for group in preference(severity) {
        for &op in group {
            let Some(pos) = find_spaced(&masked.code, open, op) else { continue };
            let new = FLIPS.iter().find(|(o, _)| *o == op).map(|(_, n)| *n)?;
            let text = format!("{}{}{}", &body[..pos], new, &body[pos + op.len()..]);
            let rhs = masked.code[pos + op.len()..].trim_start();
            let category = match op {
                "<=" | ">=" | "<" | ">" => FaultCategory::Boundary,
                "==" | "!=" if rhs.starts_with("null") => FaultCategory::NullCheck,
                _ => FaultCategory::Logic,
            };
            let summary = match category {
                FaultCategory::Boundary => format!("The implementation compares with {new} instead of {op}, so boundary values are handled differently."),
                FaultCategory::NullCheck => "The null check in the implementation is inverted.".to_string(),
                _ => format!("The implementation applies {new} where {op} is required."),
            };
            return Some(Edit {
                text,
                category,
                summary,
                change: format!("operator {op} replaced"),
            });
        }
    }
    // no operator: nudge the first zero literal
    let pos = lex::word_positions(&masked.code[open..], "0").first().map(|p| p + open)?;
    Some(Edit {
        text: format!("{}1{}", &body[..pos], &body[pos + 1..]),
        category: FaultCategory::Logic,
        summary: "The implementation starts from one instead of zero.".into(),
        change: "literal replaced".into(),
    })
}

const ANTONYMS: &[(&str, &str)] = &[
    ("largest", "smallest"),
    ("maximum", "minimum"),
    ("max", "min"),
    ("first", "last"),
    ("true", "false"),
    ("ascending", "descending"),
    ("greater", "less"),
    ("before", "after"),
    ("lower", "upper"),
    ("increases", "decreases"),
    ("inclusive", "exclusive"),
    ("positive", "negative"),
    ("sum", "product"),
    ("start", "end"),
];

fn counterpart(word: &str) -> Option<&'static str> {
    let lower = word.to_ascii_lowercase();
    ANTONYMS.iter().find_map(|&(a, b)| {
        if lower == a {
            Some(b)
        } else if lower == b {
            Some(a)
        } else {
            None
        }
    })
}

fn match_case(template: &str, word: &str) -> String {
    if template.bytes().all(|b| !b.is_ascii_lowercase()) && template.len() > 1 {
        word.to_ascii_uppercase()
    } else if template.starts_with(|c: char| c.is_ascii_uppercase()) {
        let mut c = word.chars();
        c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
    } else {
        word.to_string()
    }
}

fn line_category(line: &str) -> FaultCategory {
    let t = line.trim_start().trim_start_matches('*').trim_start();
    if t.starts_with("@return") {
        FaultCategory::WrongReturn
    } else if t.starts_with("@param") {
        FaultCategory::WrongParams
    } else {
        FaultCategory::WrongBehavior
    }
}

/// Byte ranges of ASCII words in `s`.
fn words(s: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
    let b = s.as_bytes();
    let mut i = 0;
    std::iter::from_fn(move || {
        while i < b.len() && !b[i].is_ascii_alphabetic() {
            i += 1;
        }
        if i >= b.len() {
            return None;
        }
        let start = i;
        while i < b.len() && lex::is_ident_byte(b[i]) {
            i += 1;
        }
        Some((start, i))
    })
}

fn mutate_doc(doc: &str) -> Edit {
    let mut offset = 0;
    for line in doc.split_inclusive('\n') {
        for (s, e) in words(line) {
            // leave tag names and parameter names alone
            if line[..s].ends_with('@') || line[..s].trim_end().ends_with("@param") {
                continue;
            }
            let word = &line[s..e];
            if let Some(other) = counterpart(word) {
                let replacement = match_case(word, other);
                let at = offset + s;
                return Edit {
                    text: format!("{}{}{}", &doc[..at], replacement, &doc[offset + e..]),
                    category: line_category(line),
                    summary: format!("The documentation says {} where the method behaves as {}.", other.to_ascii_lowercase(), word.to_ascii_lowercase()),
                    change: "one word of the documentation replaced".into(),
                };
            }
        }
        offset += line.len();
    }
    let lines: Vec<&str> = doc.split_inclusive('\n').collect();
    if let Some(i) = lines.iter().position(|l| line_category(l) == FaultCategory::WrongParams) {
        let text: String = lines.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| *l).collect();
        return Edit {
            text,
            category: FaultCategory::MissingInfo,
            summary: "The documentation omits a parameter the method depends on.".into(),
            change: "parameter description removed".into(),
        };
    }
    let close = doc.rfind("*/").unwrap_or(doc.len());
    let line_start = doc[..close].rfind('\n').map_or(0, |p| p + 1);
    let text = if doc[line_start..close].trim().is_empty() {
        let indent = &doc[line_start..close];
        format!("{}{}* Returns null if the input is empty.\n{}", &doc[..line_start], indent, &doc[line_start..])
    } else {
        format!("{} Returns null if the input is empty. {}", doc[..close].trim_end(), &doc[close..])
    };
    Edit {
        text,
        category: FaultCategory::WrongBehavior,
        summary: "The documentation promises a null result for empty input that the method never produces.".into(),
        change: "sentence added to the documentation".into(),
    }
}

/// A mutation reply for `plan` on `bundle`. When no operator can be flipped
/// the body is returned unchanged and validation rejects the reply.
pub fn canned_mutation(bundle: &ArtifactBundle, plan: &MutationPlan) -> String {
    let targets = plan.targets();
    let mut reply = serde_json::Map::new();
    let mut summaries = Vec::new();
    let mut changes = Vec::new();
    let mut category = None;
    if targets.contains(&Artifact::Javadoc) {
        let e = mutate_doc(&bundle.javadoc);
        reply.insert("mutated_javadoc".into(), json!(e.text));
        category = Some(e.category);
        summaries.push(e.summary);
        changes.push(e.change);
    }
    if targets.contains(&Artifact::Mut) {
        match mutate_code(&bundle.mut_body, plan.severity) {
            Some(e) => {
                reply.insert("mutated_mut".into(), json!(e.text));
                category = Some(e.category);
                summaries.push(e.summary);
                changes.push(e.change);
            }
            None => {
                reply.insert("mutated_mut".into(), json!(bundle.mut_body));
                category.get_or_insert(FaultCategory::Logic);
                summaries.push("No change.".into());
            }
        }
    }
    reply.insert("fault_category".into(), json!(category.map(|c| c.as_str())));
    reply.insert("ground_truth_summary".into(), json!(summaries.join(" ")));
    reply.insert("change_description".into(), json!(changes.join("; ")));
    reply.insert("difficulty".into(), json!(plan.severity.as_str()));
    serde_json::Value::Object(reply).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::render_blind_prompt;
    use crate::model::{Strategy, Variant};
    use crate::perturb::mutation::tests::sample_bundle;
    use crate::perturb::validate_mutation;

    fn plan(variant: Variant, severity: Severity, strategy: Option<Strategy>) -> MutationPlan {
        MutationPlan {
            sample_id: "Stats.java#max:10".into(),
            variant,
            severity,
            strategy,
        }
    }

    fn all_plans() -> Vec<MutationPlan> {
        let mut out = Vec::new();
        for s in Severity::ALL {
            out.push(plan(Variant::DocBug, s, None));
            out.push(plan(Variant::MutBug, s, None));
            for st in Strategy::ALL {
                out.push(plan(Variant::Contradiction, s, Some(st)));
            }
        }
        out
    }

    #[test]
    fn canned_mutations_validate_and_stay_blind() {
        let b = sample_bundle();
        for p in all_plans() {
            let reply = canned_mutation(&b, &p);
            let r = validate_mutation(&b, &p, &reply).unwrap_or_else(|e| panic!("{p:?}: {e}"));
            assert_eq!(r.affected_artifacts, p.targets());
            assert!(render_blind_prompt(&r, &b).is_ok(), "{p:?}");
        }
    }

    #[test]
    fn severity_picks_operator_family() {
        let b = sample_bundle();
        let subtle = mutate_code(&b.mut_body, Severity::Subtle).unwrap();
        assert_eq!(subtle.category, FaultCategory::Boundary);
        assert!(subtle.text.contains("i <= xs.length"));
        // only boundary operators exist in this body
        let heavy = mutate_code(&b.mut_body, Severity::Heavy).unwrap();
        assert_eq!(heavy.category, FaultCategory::Boundary);
        let body = "int f(Object o) {\n    if (o == null) return 0;\n    return 1 + 2;\n}";
        assert_eq!(mutate_code(body, Severity::Normal).unwrap().category, FaultCategory::NullCheck);
        assert!(mutate_code(body, Severity::Heavy).unwrap().text.contains("1 - 2"));
    }

    #[test]
    fn string_concatenation_is_skipped() {
        let body = "String f(int a) {\n    return \"v\" + a;\n}";
        assert!(mutate_code(body, Severity::Heavy).is_none());
    }

    #[test]
    fn doc_swaps_preserve_case_and_tags() {
        let e = mutate_doc("/**\n * Returns the Largest value.\n * @param max bound\n */");
        assert_eq!(e.text, "/**\n * Returns the Smallest value.\n * @param max bound\n */");
        assert_eq!(e.category, FaultCategory::WrongBehavior);
        let r = mutate_doc("/**\n * Finds it.\n * @param xs values\n * @return the first match\n */");
        assert_eq!(r.category, FaultCategory::WrongReturn);
        assert!(r.text.contains("the last match"));
    }

    #[test]
    fn doc_fallbacks() {
        let m = mutate_doc("/**\n * Finds it.\n * @param xs values\n */");
        assert_eq!(m.category, FaultCategory::MissingInfo);
        assert_eq!(m.text, "/**\n * Finds it.\n */");
        let a = mutate_doc("/**\n * Finds it.\n */");
        assert_eq!(a.text, "/**\n * Finds it.\n * Returns null if the input is empty.\n */");
        let one = mutate_doc("/** Finds it. */");
        assert_eq!(one.text, "/** Finds it. Returns null if the input is empty. */");
    }
}
