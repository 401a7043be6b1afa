//! Behavioural checks any [`NluProvider`] must pass.

use super::provider::NluProvider;
use super::split::MAX_ATOMIC_CHARS;
use super::tokens::words;
use super::IntentScope;

/// Runs every check over `samples` and returns a description of each
/// violation found. An empty result means the provider conforms.
pub fn check_provider(provider: &dyn NluProvider, samples: &[&str]) -> Vec<String> {
    let mut bad = Vec::new();
    for reply in samples {
        let atomics = provider.split_atomic(reply);
        for (i, a) in atomics.iter().enumerate() {
            if a.ordinal != i {
                bad.push(format!("{reply:?}: ordinal {} at position {i}", a.ordinal));
            }
            if a.text.trim().is_empty() || a.text.chars().count() > MAX_ATOMIC_CHARS {
                bad.push(format!("{reply:?}: piece {i} is empty or too long"));
            }
            match reply.get(a.source_span.range()) {
                Some(s) if s == a.text => {}
                _ => bad.push(format!("{reply:?}: piece {i} span does not match its text")),
            }
            if words(&a.text).iter().any(|w| w == "and") {
                bad.push(format!("{reply:?}: piece {i} still contains 'and'"));
            }
            if let Some(m) = provider.match_intent(a, IntentScope::Any) {
                for s in &m.slots {
                    if a.text.get(s.range()).is_none_or(|t| t.trim().is_empty()) {
                        bad.push(format!("{:?}: slot {s:?} out of bounds", a.text));
                    }
                }
            }
            if let Some(m) = provider.match_intent(a, IntentScope::Conversation) {
                if !IntentScope::Conversation.admits(m.intent) {
                    bad.push(format!("{:?}: scope ignored", a.text));
                }
            }
        }

        let mentions = provider.recognize_entities(reply);
        for (i, m) in mentions.iter().enumerate() {
            if reply.get(m.span.range()).is_none_or(str::is_empty) {
                bad.push(format!("{reply:?}: mention {i} out of bounds"));
            }
            if i > 0 && mentions[i - 1].span.end > m.span.start {
                bad.push(format!("{reply:?}: mentions {} and {i} overlap or are unordered", i - 1));
            }
        }

        for c in provider.classify_content(reply) {
            if !(0.0..=1.0).contains(&c.confidence) || c.path.is_empty() {
                bad.push(format!("{reply:?}: bad category {c:?}"));
            }
        }

        for w in words(reply) {
            let once = provider.lemmatize(&w);
            if provider.lemmatize(&once) != once {
                bad.push(format!("lemmatize is not idempotent on {w:?}"));
            }
        }
    }
    bad
}
