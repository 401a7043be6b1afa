//! Natural language understanding used by extraction and insertion.

pub mod category;
pub mod conformance;
pub mod entity;
pub mod intent;
pub mod lemma;
pub mod provider;
pub mod split;
pub mod tokens;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use category::{CategoryRule, CategoryRules, ContentCategory};
pub use entity::{EntityLexicon, EntityMention, EntityType};
pub use intent::{train_intents, Intent, IntentMatch, IntentModel, IntentScope, TaggedUtterance};
pub use lemma::{concept_key, lemmatize};
pub use provider::{load_corpus_jsonl, LocalNlu, NluProvider, NluRequest, NluResponse, WireNlu};
pub use split::{split_atomic, AtomicSentence};

/// Half-open byte range into some text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        tokens::overlaps(&self.range(), &other.range())
    }
}

#[derive(Debug, Error)]
pub enum NluError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("invalid utterance: {0}")]
    InvalidUtterance(String),
    #[error("unknown entity type {0:?}")]
    UnknownEntityType(String),
    #[error("bad NLU resource: {0}")]
    Resource(String),
    #[error("NLU transport: {0}")]
    Transport(String),
}
