//! Lexical measurements of a method body: executable lines, control flow,
//! assignments and calls.

use serde::{Deserialize, Serialize};

use super::lex::{self, is_ident_byte, word_positions};

/// Region of the masked text strictly inside the outermost body braces, or
/// the whole text when no brace pair exists.
fn body_region(code: &str) -> &str {
    match lex::outer_braces(code) {
        Some((open, close)) => &code[open + 1..close],
        None => code,
    }
}

/// Non-blank, non-comment lines inside the method body.
///
/// The declaration and the outer braces are not counted; a line that holds
/// only comment text (line comment, block comment or block continuation)
/// is not counted either.
pub fn count_executable_lines(mut_body: &str) -> usize {
    let masked = lex::mask(mut_body);
    body_region(&masked.code)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triviality {
    pub control_flow_count: usize,
    pub assignment_count: usize,
    pub call_count: usize,
    pub nontrivial: bool,
}

const CALL_EXCLUDED: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "synchronized",
    "return",
    "throw",
    "new",
    "else",
    "do",
    "try",
    "assert",
    "case",
];

fn control_flow_count(code: &str) -> usize {
    let conditionals = word_positions(code, "if").len() + word_positions(code, "switch").len();
    let dos = word_positions(code, "do").len();
    // the trailing `while` of a do-while belongs to the same construct
    let whiles = word_positions(code, "while").len().saturating_sub(dos);
    let loops = word_positions(code, "for").len() + whiles + dos;
    let handlers = word_positions(code, "try").len();
    conditionals + loops + handlers
}

/// Simple and compound assignments, including declarations with an
/// initializer. Increments (`++`/`--`) are not assignments here.
fn assignment_count(code: &str) -> usize {
    let b = code.as_bytes();
    let mut n = 0;
    for i in 0..b.len() {
        if b[i] != b'=' {
            continue;
        }
        let prev = if i > 0 { b[i - 1] } else { b' ' };
        let next = b.get(i + 1).copied().unwrap_or(b' ');
        if next == b'=' || prev == b'=' {
            continue; // `==`
        }
        if prev == b'!' {
            continue;
        }
        if prev == b'<' || prev == b'>' {
            // `<=`/`>=` are comparisons; `<<=`, `>>=`, `>>>=` are compound
            let prev2 = if i > 1 { b[i - 2] } else { b' ' };
            if prev2 != prev {
                continue;
            }
        }
        n += 1;
    }
    n
}

fn prev_word(code: &str, end: usize) -> &str {
    let before = code[..end].trim_end();
    let start = before
        .bytes()
        .rposition(|b| !is_ident_byte(b))
        .map_or(0, |p| p + 1);
    &before[start..]
}

fn call_count(code: &str) -> usize {
    let b = code.as_bytes();
    let mut n = 0;
    let mut i = 0;
    while i < b.len() {
        if is_ident_byte(b[i]) && (i == 0 || !is_ident_byte(b[i - 1])) {
            let start = i;
            while i < b.len() && is_ident_byte(b[i]) {
                i += 1;
            }
            let ident = &code[start..i];
            if ident.as_bytes()[0].is_ascii_digit() {
                continue;
            }
            let mut j = i;
            while j < b.len() && b[j].is_ascii_whitespace() {
                j += 1;
            }
            if j < b.len() && b[j] == b'(' && !CALL_EXCLUDED.contains(&ident)
                && prev_word(code, start) != "new" {
                    n += 1;
                }
            continue;
        }
        i += 1;
    }
    n
}

/// Nontrivial iff at least two control-flow constructs, or at least four
/// assignments together with at least four calls.
pub fn classify_triviality(mut_body: &str) -> Triviality {
    let masked = lex::mask(mut_body);
    let code = body_region(&masked.code);
    let control_flow_count = control_flow_count(code);
    let assignment_count = assignment_count(code);
    let call_count = call_count(code);
    Triviality {
        control_flow_count,
        assignment_count,
        call_count,
        nontrivial: control_flow_count >= 2 || (assignment_count >= 4 && call_count >= 4),
    }
}
