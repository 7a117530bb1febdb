//! Deterministic documentation-removal transforms.
//!
//! Each transform works on whole lines: a kept line is emitted verbatim,
//! a dropped line that carries `/**` or `*/` is replaced by its delimiter
//! shell so the comment stays well-formed.

use crate::corpus::javadoc::{DocComment, DocLine, LineKind};

fn rebuild(doc: &DocComment, drop: impl Fn(usize, &DocLine) -> bool) -> String {
    let mut out: Vec<String> = Vec::with_capacity(doc.lines.len());
    for (i, line) in doc.lines.iter().enumerate() {
        if !drop(i, line) {
            out.push(line.raw.clone());
        } else if let Some(shell) = line.shell() {
            out.push(shell);
        }
    }
    out.join("\n")
}

/// Drops every line before the first tag line.
pub fn strip_description(javadoc: &str) -> String {
    let doc = DocComment::parse(javadoc);
    let first_tag = doc.first_tag_index().unwrap_or(doc.lines.len());
    rebuild(&doc, |i, _| i < first_tag)
}

/// Drops each `@return` line and its continuation lines up to the next tag.
pub fn strip_return_tag(javadoc: &str) -> String {
    let doc = DocComment::parse(javadoc);
    let mut in_return = false;
    let mut dropped = vec![false; doc.lines.len()];
    for (i, line) in doc.lines.iter().enumerate() {
        if line.kind == LineKind::Tag {
            in_return = line.tag_name() == Some("@return");
        }
        dropped[i] = in_return;
    }
    if !dropped.contains(&true) {
        return javadoc.to_string();
    }
    rebuild(&doc, |i, _| dropped[i])
}

pub fn strip_description_and_return(javadoc: &str) -> String {
    strip_return_tag(&strip_description(javadoc))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "    /**\n     * Computes the checksum of the buffer.\n     * Wraps at 2^16.\n     *\n     * @param buf input bytes\n     * @return the checksum, never\n     *         negative\n     * @throws IllegalArgumentException if buf is null\n     */";

    #[test]
    fn description_removal_keeps_tags_verbatim() {
        assert_eq!(
            strip_description(FULL),
            "    /**\n     * @param buf input bytes\n     * @return the checksum, never\n     *         negative\n     * @throws IllegalArgumentException if buf is null\n     */"
        );
    }

    #[test]
    fn return_removal_takes_continuations_and_keeps_throws() {
        assert_eq!(
            strip_return_tag(FULL),
            "    /**\n     * Computes the checksum of the buffer.\n     * Wraps at 2^16.\n     *\n     * @param buf input bytes\n     * @throws IllegalArgumentException if buf is null\n     */"
        );
    }

    #[test]
    fn prose_only_becomes_shell() {
        let doc = "/**\n * Resets every counter to zero.\n */";
        assert_eq!(strip_description(doc), "/**\n */");
        assert_eq!(strip_description_and_return(doc), "/**\n */");
        assert_eq!(strip_description("/** Resets every counter. */"), "/** */");
    }

    #[test]
    fn tags_only_is_a_fixed_point() {
        let doc = "/**\n * @param a left\n * @return sum\n */";
        assert_eq!(strip_description(doc), doc);
        assert_eq!(strip_description_and_return(doc), "/**\n * @param a left\n */");
    }

    #[test]
    fn return_on_closing_line_keeps_delimiter() {
        let doc = "/**\n * Counts the nodes.\n * @return node count */";
        assert_eq!(strip_return_tag(doc), "/**\n * Counts the nodes.\n */");
    }

    #[test]
    fn no_return_is_unchanged() {
        let doc = "/**\n * Logs it.\n * @param m message\n */";
        assert_eq!(strip_return_tag(doc), doc);
    }

    #[test]
    fn compositions_commute() {
        for doc in [FULL, "/** @return x */", "/**\n * Text\n * @return y\n */"] {
            assert_eq!(
                strip_description(&strip_return_tag(doc)),
                strip_return_tag(&strip_description(doc))
            );
        }
    }

    fn doc_line() -> impl proptest::strategy::Strategy<Value = String> {
        use proptest::prelude::*;
        prop_oneof![
            "[A-Za-z ,.]{0,30}".prop_map(|t| format!(" * {t}")),
            Just(" *".to_string()),
            "[a-z]{1,8}".prop_map(|t| format!(" * @param {t} value")),
            "[a-z ]{0,20}".prop_map(|t| format!(" * @return {t}")),
            Just(" * @throws IllegalStateException when closed".to_string()),
            "[a-z ]{1,20}".prop_map(|t| format!(" *     {t}")),
        ]
    }

    proptest::proptest! {
        #[test]
        fn transforms_are_idempotent_and_commute(lines in proptest::collection::vec(doc_line(), 0..10)) {
            let doc = format!("/**\n{}\n */", lines.join("\n"));
            let d = strip_description(&doc);
            let r = strip_return_tag(&doc);
            proptest::prop_assert_eq!(strip_description(&d), d.clone());
            proptest::prop_assert_eq!(strip_return_tag(&r), r.clone());
            proptest::prop_assert_eq!(strip_description(&r), strip_return_tag(&d));
            proptest::prop_assert_eq!(strip_description_and_return(&doc), strip_description(&r));
            let tags: Vec<&str> = doc.lines().filter(|l| l.starts_with(" * @")).collect();
            for t in tags {
                proptest::prop_assert!(d.lines().any(|l| l == t));
            }
            proptest::prop_assert!(!r.lines().any(|l| l.starts_with(" * @return")));
        }
    }
}
