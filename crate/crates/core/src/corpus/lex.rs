//! Comment- and literal-aware masking of Java source.
//!
//! `mask` returns a copy of the input with the same byte length in which
//! comment text and string/char literal contents are blanked to spaces.
//! Newlines are preserved so line structure survives. Everything
//! downstream (line counting, keyword counting, brace matching, operator
//! search for mutations) runs on the masked text and maps offsets back to
//! the original one-to-one.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Masked {
    pub code: String,
    /// Byte ranges of every comment (line or block), in source order.
    pub comments: Vec<(usize, usize)>,
}

impl Masked {
    pub fn has_comment(&self) -> bool {
        !self.comments.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    LineComment,
    BlockComment,
    Str,
    TextBlock,
    Char,
}

fn blank_into(out: &mut Vec<u8>, bytes: &[u8]) {
    for &b in bytes {
        out.push(if b == b'\n' { b'\n' } else { b' ' });
    }
}

pub fn mask(src: &str) -> Masked {
    let bytes = src.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut comments = Vec::new();
    let mut state = State::Code;
    let mut comment_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let next = bytes.get(i + 1).copied();
        match state {
            State::Code => {
                if b == b'/' && next == Some(b'/') {
                    state = State::LineComment;
                    comment_start = i;
                    out.extend_from_slice(b"  ");
                    i += 2;
                    continue;
                }
                if b == b'/' && next == Some(b'*') {
                    state = State::BlockComment;
                    comment_start = i;
                    out.extend_from_slice(b"  ");
                    i += 2;
                    continue;
                }
                if b == b'"' {
                    if bytes[i..].starts_with(b"\"\"\"") {
                        state = State::TextBlock;
                        out.extend_from_slice(b"\"\"\"");
                        i += 3;
                        continue;
                    }
                    state = State::Str;
                } else if b == b'\'' {
                    state = State::Char;
                }
                out.push(b);
                i += 1;
            }
            State::LineComment => {
                if b == b'\n' {
                    comments.push((comment_start, i));
                    state = State::Code;
                    out.push(b'\n');
                } else {
                    out.push(b' ');
                }
                i += 1;
            }
            State::BlockComment => {
                if b == b'*' && next == Some(b'/') {
                    out.extend_from_slice(b"  ");
                    i += 2;
                    comments.push((comment_start, i));
                    state = State::Code;
                    continue;
                }
                blank_into(&mut out, &[b]);
                i += 1;
            }
            State::Str | State::Char => {
                let quote = if state == State::Str { b'"' } else { b'\'' };
                if b == b'\\' && i + 1 < bytes.len() {
                    blank_into(&mut out, &bytes[i..i + 2]);
                    i += 2;
                    continue;
                }
                if b == quote || b == b'\n' {
                    // unterminated literals end at the line break
                    out.push(b);
                    state = State::Code;
                } else {
                    out.push(b' ');
                }
                i += 1;
            }
            State::TextBlock => {
                if bytes[i..].starts_with(b"\"\"\"") {
                    out.extend_from_slice(b"\"\"\"");
                    i += 3;
                    state = State::Code;
                    continue;
                }
                if b == b'\\' && i + 1 < bytes.len() {
                    blank_into(&mut out, &bytes[i..i + 2]);
                    i += 2;
                    continue;
                }
                blank_into(&mut out, &[b]);
                i += 1;
            }
        }
    }
    if matches!(state, State::LineComment | State::BlockComment) {
        comments.push((comment_start, bytes.len()));
    }
    // multi-byte characters are either copied whole (code) or blanked
    // byte-for-byte (comments, literals), so the output stays valid UTF-8
    let code = String::from_utf8(out).expect("masking preserves UTF-8 boundaries");
    Masked { code, comments }
}

/// Byte offsets of the first `{` and its matching `}` in masked code.
pub fn outer_braces(masked: &str) -> Option<(usize, usize)> {
    let open = masked.find('{')?;
    let mut depth = 0usize;
    for (i, b) in masked.bytes().enumerate().skip(open) {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((open, i));
                }
            }
            _ => {}
        }
    }
    None
}

pub fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

/// Whole-word occurrences of `word` in masked code.
pub fn word_positions(code: &str, word: &str) -> Vec<usize> {
    let bytes = code.as_bytes();
    code.match_indices(word)
        .map(|(i, _)| i)
        .filter(|&i| {
            let before_ok = i == 0 || !is_ident_byte(bytes[i - 1]);
            let end = i + word.len();
            let after_ok = end >= bytes.len() || !is_ident_byte(bytes[end]);
            before_ok && after_ok
        })
        .collect()
}
