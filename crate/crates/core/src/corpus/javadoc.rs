//! Javadoc structure and documentation-quality rules.
//!
//! A doc comment is handled line by line. Each line keeps its raw text so
//! edits that drop lines leave every other line byte-identical. The prose
//! description is every line before the first line whose first
//! non-decoration token starts with `@`.

use serde::{Deserialize, Serialize};

use super::signature::parse_signature;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Blank,
    Prose,
    /// Tag line such as `@param`, `@return`, `@throws`.
    Tag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocLine {
    pub raw: String,
    /// Bytes of `{indent}/**` when this line opens the comment.
    pub open_len: usize,
    /// Start of the closing `*/` (including whitespace before it).
    pub close_at: Option<usize>,
    pub kind: LineKind,
}

impl DocLine {
    fn parse(raw: &str, first: bool) -> DocLine {
        let mut open_len = 0;
        if first {
            if let Some(p) = raw.find("/**") {
                if raw[..p].trim().is_empty() {
                    open_len = p + 3;
                }
            }
        }
        let close_at = raw[open_len..].rfind("*/").map(|p| {
            let p = open_len + p;
            // pull in the whitespace before `*/`
            p - (raw[open_len..p].len() - raw[open_len..p].trim_end().len())
        });
        let mut line = DocLine {
            raw: raw.to_string(),
            open_len,
            close_at,
            kind: LineKind::Blank,
        };
        let content = line.content();
        line.kind = if content.is_empty() {
            LineKind::Blank
        } else if content.starts_with('@') {
            LineKind::Tag
        } else {
            LineKind::Prose
        };
        line
    }

    /// Text with the comment decoration (`/**`, leading `*`, `*/`) removed.
    pub fn content(&self) -> &str {
        let end = self.close_at.unwrap_or(self.raw.len());
        let inner = &self.raw[self.open_len..end.max(self.open_len)];
        let inner = inner.trim_start();
        let inner = if self.open_len == 0 {
            inner.strip_prefix('*').unwrap_or(inner)
        } else {
            inner
        };
        inner.trim()
    }

    pub fn tag_name(&self) -> Option<&str> {
        if self.kind != LineKind::Tag {
            return None;
        }
        let c = self.content();
        Some(c.split(|ch: char| ch.is_whitespace()).next().unwrap_or(c))
    }

    pub fn is_delimiter(&self) -> bool {
        self.open_len > 0 || self.close_at.is_some()
    }

    /// What remains of this line when its content is dropped: the opening
    /// and/or closing delimiters, or nothing.
    pub fn shell(&self) -> Option<String> {
        if !self.is_delimiter() {
            return None;
        }
        let mut s = String::new();
        if self.open_len > 0 {
            s.push_str(&self.raw[..self.open_len]);
        }
        if let Some(c) = self.close_at {
            if self.open_len == 0 {
                let indent_len = self.raw.len() - self.raw.trim_start().len();
                s.push_str(&self.raw[..indent_len]);
                s.push_str(self.raw[c..].trim_start());
            } else {
                s.push_str(&self.raw[c..]);
            }
        }
        Some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocComment {
    pub lines: Vec<DocLine>,
}

impl DocComment {
    pub fn parse(text: &str) -> DocComment {
        let lines = text
            .split('\n')
            .enumerate()
            .map(|(i, l)| DocLine::parse(l, i == 0))
            .collect();
        DocComment { lines }
    }

    pub fn render(&self) -> String {
        self.lines
            .iter()
            .map(|l| l.raw.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn first_tag_index(&self) -> Option<usize> {
        self.lines.iter().position(|l| l.kind == LineKind::Tag)
    }

    /// Prose description, whitespace-collapsed.
    pub fn description(&self) -> String {
        let end = self.first_tag_index().unwrap_or(self.lines.len());
        self.lines[..end]
            .iter()
            .map(|l| l.content())
            .filter(|c| !c.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn tag_names(&self) -> Vec<&str> {
        self.lines.iter().filter_map(|l| l.tag_name()).collect()
    }

    pub fn has_tag(&self, name: &str) -> bool {
        self.tag_names().contains(&name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocViolation {
    ContainsInheritDoc,
    ShortDescription,
    MissingReturn,
    MissingParam,
    TagOnly,
    NonEnglish,
    UsageWarningOnly,
}

impl DocViolation {
    pub fn id(self) -> &'static str {
        match self {
            DocViolation::ContainsInheritDoc => "contains-inheritDoc",
            DocViolation::ShortDescription => "short-description",
            DocViolation::MissingReturn => "missing-@return",
            DocViolation::MissingParam => "missing-@param",
            DocViolation::TagOnly => "tag-only",
            DocViolation::NonEnglish => "non-english",
            DocViolation::UsageWarningOnly => "usage-warning-only",
        }
    }
}

const MIN_DESCRIPTION_CHARS: usize = 15;

/// Strips `<p>`-style markup and unwraps `{@code x}` / `{@link X}` to their
/// argument text.
fn plain_prose(description: &str) -> String {
    let mut out = String::new();
    let mut chars = description.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '<' => {
                for d in chars.by_ref() {
                    if d == '>' {
                        break;
                    }
                }
            }
            '{' if chars.peek() == Some(&'@') => {
                // skip the tag name, keep the argument
                for d in chars.by_ref() {
                    if d.is_whitespace() || d == '}' {
                        break;
                    }
                }
            }
            '}' => {}
            _ => out.push(c),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_latin_script(c: char) -> bool {
    // ASCII, Latin-1 supplement and Latin Extended-A/B, plus general
    // punctuation and symbols that show up in English prose
    (c as u32) < 0x0250
        || ('\u{1E00}'..='\u{1EFF}').contains(&c)
        || ('\u{2000}'..='\u{206F}').contains(&c)
        || ('\u{2190}'..='\u{22FF}').contains(&c)
}

const WARNING_OPENERS: &[&str] = &[
    "beware",
    "warning",
    "caution",
    "do not call",
    "don't call",
    "do not use",
    "don't use",
    "never call",
    "not for public use",
    "for internal use",
    "internal use only",
    "use with care",
    "deprecated",
    "note: do not",
    "note: don't",
    "this method should not be called",
    "this method must not be called",
];

fn is_usage_warning(sentence: &str) -> bool {
    let s = sentence.trim().to_lowercase();
    let s = s.trim_start_matches(|c: char| !c.is_alphanumeric());
    WARNING_OPENERS.iter().any(|w| s.starts_with(w))
}

fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if matches!(b, b'.' | b'!' | b'?')
            && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace())
        {
            let s = text[start..=i].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + 1;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Documentation rule violations for a candidate bundle, in a fixed order.
///
/// An inherited doc (`{@inheritDoc}`) is reported on its own: the comment
/// has no content of its own to judge.
pub fn check_javadoc_rules(javadoc: &str, signature: &str) -> Vec<DocViolation> {
    if javadoc.to_ascii_lowercase().contains("{@inheritdoc}") {
        return vec![DocViolation::ContainsInheritDoc];
    }
    let doc = DocComment::parse(javadoc);
    let description = plain_prose(&doc.description());
    let has_tags = doc.first_tag_index().is_some();
    let mut out = Vec::new();

    if description.is_empty() {
        if has_tags {
            out.push(DocViolation::TagOnly);
        } else {
            out.push(DocViolation::ShortDescription);
        }
    } else if description.chars().count() <= MIN_DESCRIPTION_CHARS {
        out.push(DocViolation::ShortDescription);
    }

    if let Some(sig) = parse_signature(signature) {
        if !sig.is_void() && !sig.is_constructor() && !doc.has_tag("@return") {
            out.push(DocViolation::MissingReturn);
        }
        if !sig.params.is_empty() && !doc.has_tag("@param") {
            out.push(DocViolation::MissingParam);
        }
    }

    if description.chars().any(|c| c.is_alphabetic() && !is_latin_script(c)) {
        out.push(DocViolation::NonEnglish);
    }

    let sents = sentences(&description);
    if !sents.is_empty() && sents.iter().all(|s| is_usage_warning(s)) {
        out.push(DocViolation::UsageWarningOnly);
    }
    out.sort();
    out
}
