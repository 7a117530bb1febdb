//! Best-effort recovery of a single object from raw completion text.

use serde_json::Value;

use super::schema::TraceError;

const HIDDEN_TAGS: &[&str] = &["think", "thinking", "reasoning"];

fn is_object(text: &str) -> bool {
    matches!(serde_json::from_str::<Value>(text), Ok(Value::Object(_)))
}

/// Removes `<tag>…</tag>` blocks. An unclosed opening tag is dropped on its
/// own.
fn strip_hidden_blocks(text: &str) -> String {
    let mut s = text.to_string();
    for tag in HIDDEN_TAGS {
        let open = format!("<{tag}>");
        let close = format!("</{tag}>");
        while let Some(start) = s.find(&open) {
            match s[start..].find(&close) {
                Some(rel) => s.replace_range(start..start + rel + close.len(), ""),
                None => s.replace_range(start..start + open.len(), ""),
            }
        }
        // a stray closing tag with the opener already cut off upstream
        if let Some(p) = s.find(&close) {
            s.replace_range(..p + close.len(), "");
        }
    }
    s
}

/// Doubles the backslash of any escape JSON does not define.
fn fix_escapes(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut in_str = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !in_str {
            if c == '"' {
                in_str = true;
            }
            out.push(c);
            i += 1;
            continue;
        }
        match c {
            '"' => {
                in_str = false;
                out.push(c);
            }
            '\\' => {
                let next = chars.get(i + 1).copied();
                let valid = match next {
                    Some('"' | '\\' | '/' | 'b' | 'f' | 'n' | 'r' | 't') => true,
                    Some('u') => chars.len() >= i + 6 && chars[i + 2..i + 6].iter().all(|h| h.is_ascii_hexdigit()),
                    _ => false,
                };
                if valid {
                    out.push(c);
                    out.push(next.unwrap());
                    i += 2;
                    continue;
                }
                out.push_str("\\\\");
            }
            // raw control characters are not allowed inside strings
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
        i += 1;
    }
    out
}

struct Scan {
    /// Byte index just past the first complete top-level object.
    end: Option<usize>,
    stack: Vec<u8>,
    in_str: bool,
    /// Byte positions of commas outside strings.
    commas: Vec<usize>,
}

fn scan(text: &str) -> Scan {
    let b = text.as_bytes();
    let mut st = Scan {
        end: None,
        stack: Vec::new(),
        in_str: false,
        commas: Vec::new(),
    };
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if st.in_str {
            match c {
                b'\\' => i += 1,
                b'"' => st.in_str = false,
                _ => {}
            }
        } else {
            match c {
                b'"' => st.in_str = true,
                b'{' => st.stack.push(b'}'),
                b'[' => st.stack.push(b']'),
                b'}' | b']' => {
                    st.stack.pop();
                    if st.stack.is_empty() {
                        st.end = Some(i + 1);
                        return st;
                    }
                }
                b',' => st.commas.push(i),
                _ => {}
            }
        }
        i += 1;
    }
    st
}

/// Closes an open string and every open bracket at end of text.
fn close_open(text: &str) -> String {
    let st = scan(text);
    let mut s = text.to_string();
    if st.in_str {
        if s.ends_with('\\') && !s.ends_with("\\\\") {
            s.pop();
        }
        s.push('"');
    }
    let trimmed_len = s.trim_end().trim_end_matches(',').trim_end().len();
    s.truncate(trimmed_len);
    if s.ends_with(':') {
        s.push_str("null");
    }
    for closer in st.stack.iter().rev() {
        s.push(*closer as char);
    }
    s
}

/// Returns candidate object text, or `PARSE_FAILURE` carrying `raw`.
///
/// Text that already is a single object comes back trimmed and otherwise
/// untouched, so the function is idempotent.
pub fn repair_raw_output(raw: &str) -> Result<String, TraceError> {
    let trimmed = raw.trim();
    if is_object(trimmed) {
        return Ok(trimmed.to_string());
    }
    let fail = || TraceError::ParseFailure(raw.to_string());
    let visible = strip_hidden_blocks(raw);
    let start = visible.find('{').ok_or_else(fail)?;
    let body = fix_escapes(&visible[start..]);
    let st = scan(&body);
    if let Some(end) = st.end {
        let candidate = &body[..end];
        return if is_object(candidate) {
            Ok(candidate.to_string())
        } else {
            Err(fail())
        };
    }
    // truncated: close what is open, backing off one element at a time
    let mut text = body.trim_end().to_string();
    loop {
        let candidate = close_open(&text);
        if is_object(&candidate) {
            return Ok(candidate);
        }
        let st = scan(&text);
        match st.commas.last() {
            Some(&p) => text.truncate(p),
            None => return Err(fail()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_object_is_returned_trimmed() {
        assert_eq!(repair_raw_output("  {\"a\": 1}\n").unwrap(), "{\"a\": 1}");
    }

    #[test]
    fn reasoning_prefix_and_trailing_prose() {
        let raw = "<think>first {draft}</think>\nHere you go:\n```json\n{\"a\": {\"b\": [1, 2]}}\n```\nDone.";
        assert_eq!(repair_raw_output(raw).unwrap(), "{\"a\": {\"b\": [1, 2]}}");
    }

    #[test]
    fn truncated_object_is_closed() {
        let out = repair_raw_output("{\"a\": [1, 2, {\"b\": \"unterminated").unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["a"][2]["b"], "unterminated");
    }

    #[test]
    fn dangling_key_is_dropped() {
        let out = repair_raw_output("{\"a\": 1, \"b\"").unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["a"], 1);
    }

    #[test]
    fn dangling_colon_gets_null() {
        let out = repair_raw_output("{\"a\": 1, \"b\":").unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["b"].is_null());
    }

    #[test]
    fn bad_escapes_are_doubled() {
        let out = repair_raw_output(r#"{"e": "uses \d+ and \u00e9 and \q"}"#).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["e"], "uses \\d+ and é and \\q");
    }

    #[test]
    fn hopeless_input_carries_raw_text() {
        assert_eq!(
            repair_raw_output("I cannot help with that."),
            Err(TraceError::ParseFailure("I cannot help with that.".into()))
        );
        assert!(repair_raw_output("").is_err());
    }

    #[test]
    fn repair_is_idempotent_on_fixtures() {
        for raw in [
            "<reasoning>x</reasoning>{\"a\":1}",
            "{\"a\": [1, {\"b\": \"c",
            r#"{"p": "C:\path"}"#,
        ] {
            let once = repair_raw_output(raw).unwrap();
            assert_eq!(repair_raw_output(&once).unwrap(), once);
        }
    }

    proptest::proptest! {
        #[test]
        fn repair_output_is_a_fixed_point(
            prefix in "[a-z <>/]{0,20}",
            keys in proptest::collection::vec(("[a-z]{1,6}", "[a-zA-Z0-9 .]{0,12}"), 1..6),
            cut in 0usize..200,
        ) {
            let body: Vec<String> = keys.iter().map(|(k, v)| format!("\"{k}\": \"{v}\"")).collect();
            let object = format!("{{{}}}", body.join(", "));
            let damaged = format!("{prefix}{}", &object[..cut.min(object.len())]);
            if let Ok(fixed) = repair_raw_output(&damaged) {
                proptest::prop_assert!(serde_json::from_str::<Value>(&fixed).is_ok());
                proptest::prop_assert_eq!(repair_raw_output(&fixed), Ok(fixed.clone()));
            }
            proptest::prop_assert_eq!(repair_raw_output(&object), Ok(object.clone()));
        }
    }
}
