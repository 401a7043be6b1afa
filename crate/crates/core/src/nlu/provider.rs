//! The NLU interface consumed by extraction and insertion, its local
//! implementation, and a JSON wire format for out-of-process providers.

use serde::{Deserialize, Serialize};

use super::category::{CategoryRules, ContentCategory};
use super::entity::{EntityLexicon, EntityMention};
use super::intent::{train_intents, IntentMatch, IntentModel, IntentScope, TaggedUtterance};
use super::split::{split_atomic, AtomicSentence};
use super::{lemma, NluError};

pub trait NluProvider {
    fn split_atomic(&self, reply: &str) -> Vec<AtomicSentence>;
    fn match_intent(&self, atomic: &AtomicSentence, scope: IntentScope) -> Option<IntentMatch>;
    fn recognize_entities(&self, text: &str) -> Vec<EntityMention>;
    fn classify_content(&self, text: &str) -> Vec<ContentCategory>;
    fn lemmatize(&self, phrase: &str) -> String;
}

/// Deterministic in-process provider.
#[derive(Debug, Clone)]
pub struct LocalNlu {
    pub model: IntentModel,
    pub entities: EntityLexicon,
    pub categories: CategoryRules,
}

impl LocalNlu {
    pub fn new(model: IntentModel, entities: EntityLexicon, categories: CategoryRules) -> Self {
        LocalNlu {
            model,
            entities,
            categories,
        }
    }

    pub fn train(
        corpus: &[TaggedUtterance],
        entities: EntityLexicon,
        categories: CategoryRules,
    ) -> Result<Self, NluError> {
        Ok(LocalNlu::new(train_intents(corpus)?, entities, categories))
    }
}

impl NluProvider for LocalNlu {
    fn split_atomic(&self, reply: &str) -> Vec<AtomicSentence> {
        split_atomic(reply)
    }

    fn match_intent(&self, atomic: &AtomicSentence, scope: IntentScope) -> Option<IntentMatch> {
        self.model.match_intent(atomic, scope)
    }

    fn recognize_entities(&self, text: &str) -> Vec<EntityMention> {
        self.entities.recognize(text)
    }

    fn classify_content(&self, text: &str) -> Vec<ContentCategory> {
        self.categories.classify(text)
    }

    fn lemmatize(&self, phrase: &str) -> String {
        lemma::lemmatize(phrase)
    }
}

/// Parses one utterance per line; blank lines are skipped.
pub fn load_corpus_jsonl(text: &str) -> Result<Vec<TaggedUtterance>, NluError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let utt: TaggedUtterance = serde_json::from_str(l)
                .map_err(|e| NluError::Resource(format!("line {}: {e}", i + 1)))?;
            utt.validate()?;
            Ok(utt)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum NluRequest {
    SplitAtomic { reply: String },
    MatchIntent { atomic: AtomicSentence, scope: IntentScope },
    RecognizeEntities { text: String },
    ClassifyContent { text: String },
    Lemmatize { phrase: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "result", rename_all = "kebab-case")]
pub enum NluResponse {
    SplitAtomic(Vec<AtomicSentence>),
    MatchIntent(Option<IntentMatch>),
    RecognizeEntities(Vec<EntityMention>),
    ClassifyContent(Vec<ContentCategory>),
    Lemmatize(String),
}

/// Answers a wire request with any provider.
pub fn serve_request(provider: &dyn NluProvider, request: NluRequest) -> NluResponse {
    match request {
        NluRequest::SplitAtomic { reply } => NluResponse::SplitAtomic(provider.split_atomic(&reply)),
        NluRequest::MatchIntent { atomic, scope } => {
            NluResponse::MatchIntent(provider.match_intent(&atomic, scope))
        }
        NluRequest::RecognizeEntities { text } => {
            NluResponse::RecognizeEntities(provider.recognize_entities(&text))
        }
        NluRequest::ClassifyContent { text } => {
            NluResponse::ClassifyContent(provider.classify_content(&text))
        }
        NluRequest::Lemmatize { phrase } => NluResponse::Lemmatize(provider.lemmatize(&phrase)),
    }
}

/// JSON-in, JSON-out form of [`serve_request`].
pub fn serve_json(provider: &dyn NluProvider, request: &str) -> Result<String, NluError> {
    let req: NluRequest =
        serde_json::from_str(request).map_err(|e| NluError::Transport(e.to_string()))?;
    serde_json::to_string(&serve_request(provider, req)).map_err(|e| NluError::Transport(e.to_string()))
}

/// Provider backed by a request/response transport speaking the JSON wire
/// format, such as an HTTP client or a subprocess pipe.
///
/// The provider interface has no error channel, so transport and decoding
/// failures degrade to empty results. Use [`WireNlu::call`] directly when the
/// error matters.
pub struct WireNlu<F> {
    transport: F,
}

impl<F> WireNlu<F>
where
    F: Fn(&str) -> Result<String, NluError>,
{
    pub fn new(transport: F) -> Self {
        WireNlu { transport }
    }

    pub fn call(&self, request: &NluRequest) -> Result<NluResponse, NluError> {
        let body = serde_json::to_string(request).map_err(|e| NluError::Transport(e.to_string()))?;
        let reply = (self.transport)(&body)?;
        serde_json::from_str(&reply).map_err(|e| NluError::Transport(e.to_string()))
    }
}

impl<F> NluProvider for WireNlu<F>
where
    F: Fn(&str) -> Result<String, NluError>,
{
    fn split_atomic(&self, reply: &str) -> Vec<AtomicSentence> {
        match self.call(&NluRequest::SplitAtomic { reply: reply.into() }) {
            Ok(NluResponse::SplitAtomic(v)) => v,
            _ => Vec::new(),
        }
    }

    fn match_intent(&self, atomic: &AtomicSentence, scope: IntentScope) -> Option<IntentMatch> {
        match self.call(&NluRequest::MatchIntent { atomic: atomic.clone(), scope }) {
            Ok(NluResponse::MatchIntent(m)) => m,
            _ => None,
        }
    }

    fn recognize_entities(&self, text: &str) -> Vec<EntityMention> {
        match self.call(&NluRequest::RecognizeEntities { text: text.into() }) {
            Ok(NluResponse::RecognizeEntities(v)) => v,
            _ => Vec::new(),
        }
    }

    fn classify_content(&self, text: &str) -> Vec<ContentCategory> {
        match self.call(&NluRequest::ClassifyContent { text: text.into() }) {
            Ok(NluResponse::ClassifyContent(v)) => v,
            _ => Vec::new(),
        }
    }

    fn lemmatize(&self, phrase: &str) -> String {
        match self.call(&NluRequest::Lemmatize { phrase: phrase.into() }) {
            Ok(NluResponse::Lemmatize(s)) => s,
            _ => lemma::lemmatize(phrase),
        }
    }
}
