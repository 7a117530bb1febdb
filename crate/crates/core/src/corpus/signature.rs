//! Java method declaration parsing (lexical, no type resolution).

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "default",
    "transient",
    "volatile",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureInfo {
    pub name: String,
    pub modifiers: Vec<String>,
    /// `None` for constructors.
    pub return_type: Option<String>,
    pub params: Vec<String>,
}

impl SignatureInfo {
    pub fn is_void(&self) -> bool {
        self.return_type.as_deref() == Some("void")
    }

    pub fn is_constructor(&self) -> bool {
        self.return_type.is_none()
    }

    pub fn is_static(&self) -> bool {
        self.modifiers.iter().any(|m| m == "static")
    }

    pub fn is_entry_point(&self) -> bool {
        self.name == "main"
            && self.is_static()
            && self.is_void()
            && self.params.len() == 1
            && (self.params[0].contains("String[]") || self.params[0].contains("String..."))
    }
}

/// Removes `@Annotation` and `@Annotation(...)` tokens.
fn strip_annotations(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'@' {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'.' | b'$')) {
                i += 1;
            }
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'(' {
                let mut depth = 0;
                while j < bytes.len() {
                    match bytes[j] {
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
            out.push(' ');
            continue;
        }
        let ch = text[i..].chars().next().unwrap();
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

/// Splits on commas that are not nested inside `<>`, `()` or `[]`.
fn split_top_level(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '<' | '(' | '[' => depth += 1,
            '>' | ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        parts.push(cur.trim().to_string());
    }
    parts
}

/// Splits the head (text before the method name) into whitespace tokens
/// while keeping generic arguments attached to their type.
fn head_tokens(head: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in head.chars() {
        match ch {
            '<' => depth += 1,
            '>' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    // `List <String>` or `int []` style spacing: glue suffixes to the type
    let mut glued: Vec<String> = Vec::new();
    for t in tokens {
        if (t.starts_with('<') || t.starts_with('[')) && !glued.is_empty() {
            let last = glued.last_mut().unwrap();
            // a leading `<T>` type-parameter list follows a modifier, not a type
            if t.starts_with('<') && MODIFIERS.contains(&last.as_str()) {
                glued.push(t);
            } else {
                last.push_str(&t);
            }
        } else {
            glued.push(t);
        }
    }
    glued
}

pub fn parse_signature(signature: &str) -> Option<SignatureInfo> {
    let text = strip_annotations(signature);
    let text = text.trim().trim_end_matches('{').trim_end_matches(';').trim();
    // the parameter list is the first `(` outside generic brackets
    let mut depth = 0i32;
    let mut open = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '<' => depth += 1,
            '>' => depth -= 1,
            '(' if depth == 0 => {
                open = Some(i);
                break;
            }
            _ => {}
        }
    }
    let open = open?;
    let mut close = None;
    let mut pdepth = 0i32;
    for (i, ch) in text[open..].char_indices() {
        match ch {
            '(' => pdepth += 1,
            ')' => {
                pdepth -= 1;
                if pdepth == 0 {
                    close = Some(open + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close?;
    let before = text[..open].trim_end();
    let name_start = before
        .char_indices()
        .rev()
        .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '$'))
        .map_or(0, |(i, c)| i + c.len_utf8());
    let name = before[name_start..].to_string();
    if name.is_empty() || name.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return None;
    }
    let head = &before[..name_start];
    let mut modifiers = Vec::new();
    let mut rest = Vec::new();
    for tok in head_tokens(head) {
        if MODIFIERS.contains(&tok.as_str()) {
            modifiers.push(tok);
        } else if tok.starts_with('<') && rest.is_empty() {
            // method type parameters, e.g. `<T extends Comparable<T>>`
        } else {
            rest.push(tok);
        }
    }
    let return_type = if rest.is_empty() {
        None
    } else {
        Some(rest.join(" "))
    };
    let params = split_top_level(&text[open + 1..close]);
    Some(SignatureInfo {
        name,
        modifiers,
        return_type,
        params,
    })
}
