//! Candidate concept extraction from user replies, and the per-atomic-sentence
//! outcome labels used to score it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eval::ConfusionMatrix;
use crate::nlu::{
    AtomicSentence, EntityMention, EntityType, Intent, IntentScope, NluProvider, Span, TaggedUtterance,
};
use crate::ontology::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateConcept {
    pub text: String,
    pub atomic_ordinal: usize,
    /// Byte offsets in the reply.
    pub span: Span,
    pub intent: Intent,
    pub entity_type: EntityType,
    /// Lower is more important; see [`EntityType::priority`].
    pub priority: usize,
    pub lemma: String,
}

/// What happened to one atomic sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicTrace {
    pub atomic: AtomicSentence,
    pub intent: Option<Intent>,
    /// Slot spans in atomic-sentence offsets.
    pub slots: Vec<Span>,
    /// The slots that overlap an entity mention.
    pub kept: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub candidates: Vec<CandidateConcept>,
    pub best: Option<CandidateConcept>,
    pub mentions: Vec<EntityMention>,
    pub trace: Vec<AtomicTrace>,
}

fn shift(span: Span, by: usize) -> Span {
    Span::new(span.start + by, span.end + by)
}

/// The highest-priority entity type among mentions overlapping `span`.
fn overlapping_type(span: Span, mentions: &[EntityMention]) -> Option<EntityType> {
    mentions
        .iter()
        .filter(|m| m.span.overlaps(&span))
        .map(|m| m.entity_type)
        .min_by_key(|t| t.priority())
}

pub fn sort_candidates(candidates: &mut [CandidateConcept]) {
    candidates.sort_by(|a, b| {
        (a.priority, a.atomic_ordinal, a.span.start, a.span.end, &a.lemma)
            .cmp(&(b.priority, b.atomic_ordinal, b.span.start, b.span.end, &b.lemma))
    });
}

/// Split, match conversational intents per atomic sentence, keep slots that
/// overlap an entity found in the whole reply, rank by entity priority and
/// drop concepts the ontology already knows.
pub fn extract_concepts(reply: &str, nlu: &dyn NluProvider, ontology: &Ontology) -> ExtractionResult {
    let mentions = nlu.recognize_entities(reply);
    let mut candidates = Vec::new();
    let mut trace = Vec::new();
    for atomic in nlu.split_atomic(reply) {
        let hit = nlu.match_intent(&atomic, IntentScope::Conversation);
        let mut at = AtomicTrace {
            atomic: atomic.clone(),
            intent: hit.as_ref().map(|h| h.intent),
            slots: hit.as_ref().map(|h| h.slots.clone()).unwrap_or_default(),
            kept: Vec::new(),
        };
        if let Some(hit) = &hit {
            for slot in &hit.slots {
                let in_reply = shift(*slot, atomic.source_span.start);
                let Some(entity_type) = overlapping_type(in_reply, &mentions) else {
                    continue;
                };
                at.kept.push(*slot);
                let text = atomic.text[slot.range()].to_string();
                let lemma = nlu.lemmatize(&text);
                if ontology.find_concept(&lemma).is_some() {
                    continue;
                }
                candidates.push(CandidateConcept {
                    text,
                    atomic_ordinal: atomic.ordinal,
                    span: in_reply,
                    intent: hit.intent,
                    entity_type,
                    priority: entity_type.priority(),
                    lemma,
                });
            }
        }
        trace.push(at);
    }
    sort_candidates(&mut candidates);
    let mut seen = Vec::new();
    candidates.retain(|c| {
        let fresh = !seen.contains(&c.lemma);
        seen.push(c.lemma.clone());
        fresh
    });
    ExtractionResult {
        best: candidates.first().cloned(),
        candidates,
        mentions,
        trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeLabel {
    TP,
    FP,
    FN,
    TN,
}

/// Label one atomic sentence from the spans extracted from it and the spans
/// a human tagged in it. Any overlap is a hit; extracting only untagged text
/// is a false positive whether or not something else was tagged.
pub fn classify_outcome(extracted: &[Span], tagged: &[Span]) -> OutcomeLabel {
    let hit = extracted.iter().any(|e| tagged.iter().any(|t| e.overlaps(t)));
    match (hit, extracted.is_empty(), tagged.is_empty()) {
        (true, _, _) => OutcomeLabel::TP,
        (false, false, _) => OutcomeLabel::FP,
        (false, true, false) => OutcomeLabel::FN,
        (false, true, true) => OutcomeLabel::TN,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub reply_id: String,
    pub ordinal: usize,
    pub label: OutcomeLabel,
    pub extracted: Vec<String>,
    pub tagged: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognitionReport {
    pub counts: ConfusionMatrix,
    pub per_intent: BTreeMap<Intent, ConfusionMatrix>,
    pub labels: Vec<LabelRecord>,
}

/// Tags of a reply that fall inside an atomic sentence, clipped and moved to
/// atomic offsets.
fn tags_within(tags: &[Span], atomic: &AtomicSentence) -> Vec<Span> {
    let src = atomic.source_span;
    tags.iter()
        .filter(|t| t.overlaps(&src))
        .map(|t| Span::new(t.start.max(src.start) - src.start, t.end.min(src.end) - src.start))
        .collect()
}

/// Labels every atomic sentence of every tagged reply. A reply's `intent` is
/// the intent of the question it answers and drives the per-intent split.
pub fn run_recognition_eval(
    corpus: &[TaggedUtterance],
    nlu: &dyn NluProvider,
    ontology: &Ontology,
) -> RecognitionReport {
    let mut report = RecognitionReport {
        counts: ConfusionMatrix::default(),
        per_intent: BTreeMap::new(),
        labels: Vec::new(),
    };
    for (i, reply) in corpus.iter().enumerate() {
        let reply_id = if reply.question_id.is_empty() {
            format!("reply-{i}")
        } else {
            format!("{}#{i}", reply.question_id)
        };
        let result = extract_concepts(&reply.text, nlu, ontology);
        for at in &result.trace {
            let tagged = tags_within(&reply.tags, &at.atomic);
            let label = classify_outcome(&at.kept, &tagged);
            report.counts.record(label);
            report.per_intent.entry(reply.intent).or_default().record(label);
            let texts = |spans: &[Span]| spans.iter().map(|s| at.atomic.text[s.range()].to_string()).collect();
            report.labels.push(LabelRecord {
                reply_id: reply_id.clone(),
                ordinal: at.atomic.ordinal,
                label,
                extracted: texts(&at.kept),
                tagged: texts(&tagged),
            });
        }
    }
    report
}
