//! Intent matching trained from tagged example phrases.
//!
//! Every training phrase becomes a pattern: its words are literal tokens and
//! each tagged span collapses into a slot wildcard. At match time a pattern
//! is aligned against the atomic sentence. Literal tokens may be skipped and
//! the sentence may contain extra words between matched literals, but a slot
//! must sit directly between its matched neighbours (or the sentence edge,
//! when the slot opens or closes the pattern) and cover 1 to
//! [`MAX_SLOT_TOKENS`] words. The score of an alignment is the number of
//! matched literal tokens.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lemma::lemmatize_word;
use super::split::AtomicSentence;
use super::tokens::{fold, tokenize, Token};
use super::{NluError, Span};

pub const MAX_SLOT_TOKENS: usize = 5;
pub const MIN_MATCH_SCORE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intent {
    MemoriesPast,
    Preferences,
    Norms,
    Beliefs,
    Definition,
}

impl Intent {
    pub const ALL: [Intent; 5] = [
        Intent::MemoriesPast,
        Intent::Preferences,
        Intent::Norms,
        Intent::Beliefs,
        Intent::Definition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Intent::MemoriesPast => "memories-past",
            Intent::Preferences => "preferences",
            Intent::Norms => "norms",
            Intent::Beliefs => "beliefs",
            Intent::Definition => "definition",
        }
    }
}

// Ordered by name so that "lexicographically smaller intent" is `min`.
impl Ord for Intent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for Intent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which intents a match may resolve to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntentScope {
    /// Every intent.
    #[default]
    Any,
    /// The four conversational intents, excluding `definition`.
    Conversation,
    /// Only the dedicated `definition` intent.
    Definition,
}

impl IntentScope {
    pub fn admits(self, intent: Intent) -> bool {
        match self {
            IntentScope::Any => true,
            IntentScope::Conversation => intent != Intent::Definition,
            IntentScope::Definition => intent == Intent::Definition,
        }
    }
}

/// A training phrase with tagged parameter spans (byte offsets).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedUtterance {
    #[serde(default)]
    pub question_id: String,
    pub intent: Intent,
    pub text: String,
    #[serde(default)]
    pub tags: Vec<Span>,
}

impl TaggedUtterance {
    /// Builds an utterance from `[bracketed]` tag notation:
    /// `"I love [playing soccer]"`.
    pub fn from_bracketed(intent: Intent, marked: &str) -> Result<Self, NluError> {
        let mut text = String::with_capacity(marked.len());
        let mut tags = Vec::new();
        let mut open = None;
        for c in marked.chars() {
            match c {
                '[' if open.is_none() => open = Some(text.len()),
                ']' => {
                    let start = open.take().ok_or_else(|| {
                        NluError::InvalidUtterance(format!("unbalanced ']' in {marked:?}"))
                    })?;
                    tags.push(Span::new(start, text.len()));
                }
                _ => text.push(c),
            }
        }
        if open.is_some() {
            return Err(NluError::InvalidUtterance(format!("unclosed '[' in {marked:?}")));
        }
        let utt = TaggedUtterance {
            question_id: String::new(),
            intent,
            text,
            tags,
        };
        utt.validate()?;
        Ok(utt)
    }

    pub fn tagged_texts(&self) -> Vec<&str> {
        self.tags.iter().map(|s| &self.text[s.range()]).collect()
    }

    pub fn validate(&self) -> Result<(), NluError> {
        let bad = |why: &str| Err(NluError::InvalidUtterance(format!("{why}: {:?}", self.text)));
        let mut sorted = self.tags.clone();
        sorted.sort();
        let tokens = tokenize(&self.text);
        for (i, span) in sorted.iter().enumerate() {
            if span.start >= span.end || span.end > self.text.len() {
                return bad("tag span out of bounds");
            }
            if !self.text.is_char_boundary(span.start) || !self.text.is_char_boundary(span.end) {
                return bad("tag span splits a character");
            }
            if i > 0 && sorted[i - 1].end > span.start {
                return bad("overlapping tag spans");
            }
            if !tokens.iter().any(|t| t.start >= span.start && t.end <= span.end) {
                return bad("tag span covers no word");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternToken {
    Literal(String),
    Slot,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pattern(pub Vec<PatternToken>);

impl Pattern {
    pub fn literal_count(&self) -> usize {
        self.0.iter().filter(|t| matches!(t, PatternToken::Literal(_))).count()
    }

    pub fn slot_count(&self) -> usize {
        self.0.len() - self.literal_count()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tok) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match tok {
                PatternToken::Literal(w) => f.write_str(w)?,
                PatternToken::Slot => f.write_str("<slot>")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentModel {
    pub patterns: BTreeMap<Intent, Vec<Pattern>>,
    /// SHA-256 over the sorted, deduplicated corpus.
    pub trained_from: String,
}

/// Result of a successful intent match. Slot spans are byte offsets into the
/// atomic sentence text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentMatch {
    pub intent: Intent,
    pub slots: Vec<Span>,
    pub score: usize,
    pub pattern: String,
}

fn to_pattern(utt: &TaggedUtterance) -> Pattern {
    let mut out: Vec<PatternToken> = Vec::new();
    for tok in tokenize(&utt.text) {
        let tagged = utt.tags.iter().any(|s| tok.start >= s.start && tok.end <= s.end);
        if tagged {
            // adjacent tagged spans collapse into one slot
            if out.last() != Some(&PatternToken::Slot) {
                out.push(PatternToken::Slot);
            }
        } else {
            out.push(PatternToken::Literal(fold(tok.text)));
        }
    }
    Pattern(out)
}

fn canonical_line(utt: &TaggedUtterance) -> String {
    let mut tags = utt.tags.clone();
    tags.sort();
    let tags: Vec<String> = tags.iter().map(|s| format!("{}-{}", s.start, s.end)).collect();
    format!("{}\t{}\t{}", utt.intent, utt.text, tags.join(","))
}

/// Generalises the tagged corpus into per-intent patterns.
pub fn train_intents(corpus: &[TaggedUtterance]) -> Result<IntentModel, NluError> {
    if corpus.is_empty() {
        return Err(NluError::EmptyCorpus);
    }
    let mut lines = BTreeSet::new();
    let mut patterns: BTreeMap<Intent, BTreeSet<Pattern>> = BTreeMap::new();
    for utt in corpus {
        utt.validate()?;
        lines.insert(canonical_line(utt));
        let pattern = to_pattern(utt);
        if pattern.literal_count() == 0 {
            continue;
        }
        patterns.entry(utt.intent).or_default().insert(pattern);
    }
    let mut hasher = Sha256::new();
    for line in &lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    Ok(IntentModel {
        patterns: patterns
            .into_iter()
            .map(|(intent, set)| (intent, set.into_iter().collect()))
            .collect(),
        trained_from: hex::encode(hasher.finalize()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Alignment {
    score: usize,
    fill: usize,
    positions: Vec<usize>,
    /// Token ranges `[start, end)` of each slot, in pattern order.
    slots: Vec<(usize, usize)>,
}

impl Alignment {
    fn empty() -> Self {
        Alignment {
            score: 0,
            fill: 0,
            positions: Vec::new(),
            slots: Vec::new(),
        }
    }

    /// `Greater` means better: more literals, then tighter slots, then
    /// earlier anchors.
    fn rank(&self, other: &Self) -> Ordering {
        self.score
            .cmp(&other.score)
            .then(other.fill.cmp(&self.fill))
            .then(other.positions.cmp(&self.positions))
    }

    fn prepend(mut self, position: Option<usize>, slot: Option<(usize, usize)>) -> Self {
        if let Some(p) = position {
            self.score += 1;
            self.positions.insert(0, p);
        }
        if let Some((s, e)) = slot {
            self.fill += e - s;
            self.slots.insert(0, (s, e));
        }
        self
    }
}

struct Aligner<'a> {
    pattern: &'a [PatternToken],
    literals: Vec<Option<String>>,
    words: &'a [String],
    memo: HashMap<(usize, Option<usize>, bool), Option<Alignment>>,
}

impl<'a> Aligner<'a> {
    fn new(pattern: &'a Pattern, words: &'a [String]) -> Self {
        let literals = pattern
            .0
            .iter()
            .map(|t| match t {
                PatternToken::Literal(w) => Some(lemmatize_word(w)),
                PatternToken::Slot => None,
            })
            .collect();
        Aligner {
            pattern: &pattern.0,
            literals,
            words,
            memo: HashMap::new(),
        }
    }

    fn better(best: &mut Option<Alignment>, candidate: Option<Alignment>) {
        if let Some(c) = candidate {
            match best {
                Some(b) if c.rank(b) != Ordering::Greater => {}
                _ => *best = Some(c),
            }
        }
    }

    /// Best alignment of `pattern[k..]` given the last matched sentence
    /// position and whether `pattern[k - 1]` was matched.
    fn solve(&mut self, k: usize, last: Option<usize>, prev_matched: bool) -> Option<Alignment> {
        if k == self.pattern.len() {
            return Some(Alignment::empty());
        }
        let key = (k, last, prev_matched);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let n = self.words.len();
        let from = last.map_or(0, |p| p + 1);
        let mut best = None;
        match self.literals[k].clone() {
            Some(lit) => {
                // skip this literal
                let skipped = self.solve(k + 1, last, false);
                Self::better(&mut best, skipped);
                for q in from..n {
                    if self.words[q] == lit {
                        let rest = self.solve(k + 1, Some(q), true);
                        Self::better(&mut best, rest.map(|a| a.prepend(Some(q), None)));
                    }
                }
            }
            None => {
                let anchored_left = k == 0 || prev_matched;
                if anchored_left {
                    if k + 1 == self.pattern.len() {
                        let len = n.saturating_sub(from);
                        if (1..=MAX_SLOT_TOKENS).contains(&len) {
                            best = Some(Alignment::empty().prepend(None, Some((from, n))));
                        }
                    } else if let Some(next) = self.literals[k + 1].clone() {
                        let upper = (from + MAX_SLOT_TOKENS).min(n.saturating_sub(1));
                        for q in (from + 1)..=upper {
                            if q < n && self.words[q] == next {
                                let rest = self.solve(k + 2, Some(q), true);
                                Self::better(
                                    &mut best,
                                    rest.map(|a| a.prepend(Some(q), Some((from, q)))),
                                );
                            }
                        }
                    }
                }
            }
        }
        self.memo.insert(key, best.clone());
        best
    }
}

fn token_span(tokens: &[Token<'_>], range: (usize, usize)) -> Span {
    Span::new(tokens[range.0].start, tokens[range.1 - 1].end)
}

impl IntentModel {
    pub fn pattern_count(&self) -> usize {
        self.patterns.values().map(Vec::len).sum()
    }

    /// Best-scoring pattern within `scope`; `None` below [`MIN_MATCH_SCORE`].
    pub fn match_intent(&self, atomic: &AtomicSentence, scope: IntentScope) -> Option<IntentMatch> {
        let tokens = tokenize(&atomic.text);
        let words: Vec<String> = tokens.iter().map(|t| lemmatize_word(t.text)).collect();
        let mut best: Option<(Alignment, Intent, &Pattern)> = None;
        for (intent, patterns) in &self.patterns {
            if !scope.admits(*intent) {
                continue;
            }
            for pattern in patterns {
                let Some(al) = Aligner::new(pattern, &words).solve(0, None, false) else {
                    continue;
                };
                if al.score < MIN_MATCH_SCORE {
                    continue;
                }
                let wins = match &best {
                    None => true,
                    Some((b, b_intent, b_pat)) => al
                        .score
                        .cmp(&b.score)
                        .then(pattern.literal_count().cmp(&b_pat.literal_count()))
                        .then(b_intent.cmp(intent))
                        .then(b.fill.cmp(&al.fill))
                        .is_gt(),
                };
                if wins {
                    best = Some((al, *intent, pattern));
                }
            }
        }
        best.map(|(al, intent, pattern)| IntentMatch {
            intent,
            slots: al.slots.iter().map(|r| token_span(&tokens, *r)).collect(),
            score: al.score,
            pattern: pattern.to_string(),
        })
    }
}
