//! Candidate extraction from a tree of Java sources.
//!
//! Documented methods come from non-test files. For each one, the first
//! test method (in path order) that calls it supplies the test prefix: the
//! test body up to its first assertion. That assertion becomes the
//! reference assertion.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::lex::{self, word_positions};
use super::signature::parse_signature;
use crate::model::{ArtifactBundle, Origin};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedMethod {
    pub path: String,
    pub name: String,
    pub offset: usize,
    pub line: usize,
    pub javadoc: String,
    pub signature: String,
    pub source: String,
    pub annotations: String,
}

fn java_files(root: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "java") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn is_test_path(rel: &str) -> bool {
    let file = rel.rsplit('/').next().unwrap_or(rel);
    rel.split('/').any(|c| c == "test" || c == "tests")
        || file.ends_with("Test.java")
        || file.ends_with("Tests.java")
}

/// Skips whitespace and `@Annotation(...)` runs starting at `from`.
/// Returns the position of the declaration and the annotation text.
fn skip_annotations(src: &str, code: &str, from: usize) -> (usize, String) {
    let b = code.as_bytes();
    let mut i = from;
    let mut annotations = String::new();
    loop {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < b.len() && b[i] == b'@' && !code[i..].starts_with("@interface") {
            let start = i;
            i += 1;
            while i < b.len() && (lex::is_ident_byte(b[i]) || b[i] == b'.') {
                i += 1;
            }
            let mut j = i;
            while j < b.len() && b[j].is_ascii_whitespace() {
                j += 1;
            }
            if j < b.len() && b[j] == b'(' {
                let mut depth = 0;
                while j < b.len() {
                    match b[j] {
                        b'(' => depth += 1,
                        b')' => {
                            depth -= 1;
                            if depth == 0 {
                                j += 1;
                                break;
                            }
                        }
                        _ => {}
                    }
                    j += 1;
                }
                i = j;
            }
            annotations.push_str(src[start..i].trim());
            annotations.push('\n');
            continue;
        }
        return (i, annotations);
    }
}

/// Method declarations that follow a doc comment (or, with
/// `require_doc = false`, any method-looking declaration).
pub fn extract_methods(path: &str, src: &str, require_doc: bool) -> Vec<ExtractedMethod> {
    let masked = lex::mask(src);
    let code = &masked.code;
    let mut out = Vec::new();
    let mut anchors: Vec<(usize, Option<(usize, usize)>)> = Vec::new();
    for &(s, e) in &masked.comments {
        if src[s..].starts_with("/**") {
            anchors.push((e, Some((s, e))));
        }
    }
    if !require_doc {
        // every `{` that closes a parenthesised header is a candidate
        for (i, b) in code.bytes().enumerate() {
            if b == b';' || b == b'}' || b == b'{' {
                anchors.push((i + 1, None));
            }
        }
        anchors.sort();
        anchors.dedup_by_key(|a| a.0);
    }
    for (after, doc) in anchors {
        let (decl_start, annotations) = skip_annotations(src, code, after);
        let rest = &code[decl_start..];
        let Some(stop) = rest.find(['{', ';', '}', '=']) else {
            continue;
        };
        if rest.as_bytes()[stop] != b'{' {
            continue;
        }
        let header = &rest[..stop];
        if !header.contains('(')
            || header.contains("->")
            || word_positions(header, "class").len()
                + word_positions(header, "interface").len()
                + word_positions(header, "enum").len()
                + word_positions(header, "new").len()
                > 0
            || header.trim().is_empty()
        {
            continue;
        }
        let first_word = header.split_whitespace().next().unwrap_or("");
        if matches!(
            first_word,
            "if" | "for" | "while" | "switch" | "catch" | "synchronized" | "try" | "else" | "do" | "return"
        ) || first_word.starts_with("if(")
            || first_word.starts_with("for(")
            || first_word.starts_with("while(")
        {
            continue;
        }
        let signature = src[decl_start..decl_start + stop].trim().to_string();
        let Some(sig) = parse_signature(&signature) else {
            continue;
        };
        let Some((_, close)) = lex::outer_braces(&code[decl_start..]) else {
            continue;
        };
        let close = decl_start + close;
        let javadoc = doc.map(|(s, e)| src[s..e].to_string()).unwrap_or_default();
        out.push(ExtractedMethod {
            path: path.to_string(),
            name: sig.name,
            offset: decl_start,
            line: src[..decl_start].matches('\n').count() + 1,
            javadoc,
            signature,
            source: src[decl_start..=close].to_string(),
            annotations,
        });
    }
    out.sort_by_key(|m| m.offset);
    out.dedup_by_key(|m| m.offset);
    out
}

fn is_assertion_line(code_line: &str) -> bool {
    let t = code_line.trim_start();
    t.starts_with("assert")
        || t.starts_with("fail(")
        || t.starts_with("Assert.")
        || t.starts_with("Assertions.")
        || t.starts_with("verify(")
}

/// Splits a test method into (prefix, first assertion statement).
pub fn split_test(test_source: &str) -> (String, Option<String>) {
    let masked = lex::mask(test_source);
    let Some((open, close)) = lex::outer_braces(&masked.code) else {
        return (String::new(), None);
    };
    let inner_src = &test_source[open + 1..close];
    let inner_code = &masked.code[open + 1..close];
    let mut prefix = Vec::new();
    let src_lines: Vec<&str> = inner_src.split('\n').collect();
    for (i, code_line) in inner_code.split('\n').enumerate() {
        if is_assertion_line(code_line) {
            let mut assertion = String::new();
            for l in &src_lines[i..] {
                assertion.push_str(l.trim());
                if l.trim_end().ends_with(';') {
                    break;
                }
                assertion.push(' ');
            }
            return (join_prefix(&prefix), Some(assertion));
        }
        prefix.push(src_lines[i]);
    }
    (join_prefix(&prefix), None)
}

fn join_prefix(lines: &[&str]) -> String {
    let kept: Vec<&str> = lines.iter().copied().skip_while(|l| l.trim().is_empty()).collect();
    let text = kept.join("\n");
    text.trim_end().to_string()
}

fn calls_method(test_code: &str, name: &str) -> bool {
    let bytes = test_code.as_bytes();
    word_positions(test_code, name).into_iter().any(|p| {
        let after = test_code[p + name.len()..].trim_start();
        let before = test_code[..p].trim_end();
        after.starts_with('(') && !before.ends_with("void") && bytes.get(p.wrapping_sub(1)) != Some(&b'@')
    })
}

fn class_stem(path: &str) -> &str {
    path.rsplit('/')
        .next()
        .unwrap_or(path)
        .trim_end_matches(".java")
}

/// Walks `root`, pairs documented methods with the tests that exercise
/// them and returns candidates sorted by (path, offset).
pub fn extract_candidates(root: &Path) -> io::Result<Vec<ArtifactBundle>> {
    let mut methods = Vec::new();
    let mut tests = Vec::new();
    for file in java_files(root)? {
        let rel = file
            .strip_prefix(root)
            .unwrap_or(&file)
            .to_string_lossy()
            .replace('\\', "/");
        let src = fs::read_to_string(&file)?;
        if is_test_path(&rel) {
            for m in extract_methods(&rel, &src, false) {
                if m.annotations.contains("@Test") || m.name.starts_with("test") {
                    tests.push(m);
                }
            }
        } else {
            methods.extend(extract_methods(&rel, &src, true));
        }
    }
    let mut out = Vec::with_capacity(methods.len());
    for m in methods {
        let stem = class_stem(&m.path);
        let preferred = format!("{stem}Test");
        let mut matching: Vec<&ExtractedMethod> = tests
            .iter()
            .filter(|t| calls_method(&lex::mask(&t.source).code, &m.name))
            .collect();
        matching.sort_by_key(|t| (class_stem(&t.path) != preferred, t.path.clone(), t.offset));
        let (test_prefix, reference_assertion) = matching
            .first()
            .map(|t| split_test(&t.source))
            .unwrap_or_default();
        out.push(ArtifactBundle {
            sample_id: format!("{}#{}:{}", m.path, m.name, m.line),
            mut_body: m.source,
            signature: m.signature,
            javadoc: m.javadoc,
            test_prefix,
            reference_assertion,
            origin: Origin {
                path: m.path,
                method: m.name,
                offset: m.offset,
            },
        });
    }
    Ok(out)
}
