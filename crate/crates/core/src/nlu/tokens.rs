//! Word tokenization shared by every NLU component.
//!
//! A token is a maximal run of alphanumeric characters, optionally joined by
//! internal apostrophes (`don't`, `it's`). Offsets are byte offsets into the
//! source string and always fall on `char` boundaries.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

impl Token<'_> {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if !c.is_alphanumeric() {
            continue;
        }
        let mut end = start + c.len_utf8();
        while let Some(&(i, next)) = chars.peek() {
            if next.is_alphanumeric() {
                end = i + next.len_utf8();
                chars.next();
            } else if is_apostrophe(next) {
                // only keep the apostrophe when a letter follows it
                let mut ahead = text[i + next.len_utf8()..].chars();
                match ahead.next() {
                    Some(after) if after.is_alphanumeric() => {
                        chars.next();
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        tokens.push(Token {
            text: &text[start..end],
            start,
            end,
        });
    }
    tokens
}

/// Lowercased token strings, apostrophes normalised to ASCII.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| fold(t.text)).collect()
}

pub(crate) fn fold(word: &str) -> String {
    word.chars()
        .map(|c| if is_apostrophe(c) { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect()
}

/// True when two half-open ranges share at least one position.
pub fn overlaps(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}
