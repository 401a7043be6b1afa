use serde::{Deserialize, Serialize};

use super::tokens::{fold, tokenize};
use super::Span;

/// Longest atomic sentence accepted by the intent matcher, in characters.
pub const MAX_ATOMIC_CHARS: usize = 256;

/// One piece of a user reply, the unit of extraction and of evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicSentence {
    pub text: String,
    /// Byte offsets of `text` inside the original reply.
    pub source_span: Span,
    pub ordinal: usize,
}

impl AtomicSentence {
    /// Wraps a standalone sentence that was not produced by splitting.
    pub fn standalone(text: &str) -> Self {
        AtomicSentence {
            text: text.to_string(),
            source_span: Span::new(0, text.len()),
            ordinal: 0,
        }
    }
}

fn trimmed(reply: &str, start: usize, end: usize) -> (usize, usize) {
    let piece = &reply[start..end];
    let lead = piece.len() - piece.trim_start().len();
    let trail = piece.len() - piece.trim_end().len();
    if lead == piece.len() {
        return (start, start);
    }
    (start + lead, end - trail)
}

/// Byte offset of the cut for a piece longer than [`MAX_ATOMIC_CHARS`]:
/// the last whitespace at or before the 256th character, or a hard cut there.
fn cut_point(piece: &str) -> (usize, usize) {
    let limit = piece
        .char_indices()
        .nth(MAX_ATOMIC_CHARS)
        .map(|(i, _)| i)
        .unwrap_or(piece.len());
    let ws = piece
        .char_indices()
        .take_while(|(i, _)| *i <= limit)
        .filter(|(i, c)| *i > 0 && c.is_whitespace())
        .map(|(i, c)| (i, i + c.len_utf8()))
        .last();
    match ws {
        Some((cut, resume)) => (cut, resume),
        None => (limit, limit),
    }
}

/// Splits a reply at every standalone `and` and caps each piece at
/// [`MAX_ATOMIC_CHARS`] characters.
pub fn split_atomic(reply: &str) -> Vec<AtomicSentence> {
    let mut bounds = Vec::new();
    let mut seg_start = 0;
    for tok in tokenize(reply) {
        if fold(tok.text) == "and" {
            bounds.push((seg_start, tok.start));
            seg_start = tok.end;
        }
    }
    bounds.push((seg_start, reply.len()));

    let mut pieces = Vec::new();
    for (start, end) in bounds {
        let (mut s, e) = trimmed(reply, start, end);
        while s < e {
            let piece = &reply[s..e];
            if piece.chars().count() <= MAX_ATOMIC_CHARS {
                pieces.push((s, e));
                break;
            }
            let (cut, resume) = cut_point(piece);
            let (ps, pe) = trimmed(reply, s, s + cut);
            if ps < pe {
                pieces.push((ps, pe));
            }
            s = trimmed(reply, s + resume, e).0;
        }
    }

    pieces
        .into_iter()
        .enumerate()
        .map(|(ordinal, (s, e))| AtomicSentence {
            text: reply[s..e].to_string(),
            source_span: Span::new(s, e),
            ordinal,
        })
        .collect()
}
