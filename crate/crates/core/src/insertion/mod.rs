//! Interactive placement of a new concept, as a question/answer state machine.
//!
//! All four methods share the same local descent: starting from a class, ask
//! about each child in declaration order, move into the first child the user
//! accepts, and when every child is refused offer the current class itself
//! as the parent. There is no backtracking. The methods differ only in where
//! the descent starts:
//!
//! 1. always at the root;
//! 2. at the class mapped to the concept's entity type, if the user agrees;
//! 3. at the first class reached by repeatedly asking for a one-word
//!    definition, inserting every intermediate definition on the way;
//! 4. at a class suggested by the keywords and content categories of a
//!    sentence about the concept.
//!
//! Methods 2 to 4 fall back to method 1 when their start cannot be found.

mod oracle;
mod transcript;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nlu::lemma::{concept_key, lemma_tokens};
use crate::nlu::{AtomicSentence, EntityType, IntentScope, NluProvider};
use crate::ontology::{Ontology, OntologyError};
use crate::tree::{class_keywords, mentions_keyword, patch_tree, DialogueTree, TreeError};

pub use oracle::{run_with_oracle, OracleRun, OracleUser};
pub use transcript::{read_transcript, replay, write_transcript, TranscriptEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionKind {
    YesNo,
    AskDefinition,
    AskSentence,
    ProposeStart,
    ProposeLeafAttach,
    ProposeSiblingAttach,
}

impl QuestionKind {
    /// Questions answered with yes or no.
    pub fn is_closed(self) -> bool {
        !matches!(self, QuestionKind::AskDefinition | QuestionKind::AskSentence)
    }

    pub fn is_attach(self) -> bool {
        matches!(self, QuestionKind::ProposeLeafAttach | QuestionKind::ProposeSiblingAttach)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub kind: QuestionKind,
    pub text: String,
    pub subject: String,
    /// The class asked about; absent for open questions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
}

fn class_phrase(onto: &Ontology, class: &str) -> String {
    onto.class(class)
        .map_or_else(|| class.to_string(), |c| c.display_name.to_lowercase())
}

impl Question {
    fn closed(kind: QuestionKind, subject: &str, class: &str, onto: &Ontology) -> Self {
        let object = class_phrase(onto, class);
        let text = match kind {
            QuestionKind::YesNo => format!("Is it correct to say that {subject} is a type of {object}?"),
            QuestionKind::ProposeStart => format!("Is {subject} a kind of {object}?"),
            _ => format!("Can I add {subject} as a new kind of {object}?"),
        };
        Question {
            kind,
            text,
            subject: subject.to_string(),
            object: Some(class.to_string()),
        }
    }

    fn ask_definition(subject: &str) -> Self {
        Question {
            kind: QuestionKind::AskDefinition,
            text: format!("I'm not sure what you are talking about. Please, try to define {subject} with one word"),
            subject: subject.to_string(),
            object: None,
        }
    }

    fn ask_sentence(subject: &str) -> Self {
        Question {
            kind: QuestionKind::AskSentence,
            text: format!("Please tell me a sentence about {subject}"),
            subject: subject.to_string(),
            object: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerKind {
    Yes,
    No,
    FreeText,
    Stop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub kind: AnswerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

const STOP_PHRASES: &[&str] = &["stop", "i don't know", "i dont know", "i do not know", "don't know", "dunno"];

fn is_stop_phrase(text: &str) -> bool {
    let folded = text
        .trim()
        .trim_end_matches(['.', '!', '?'])
        .replace('\u{2019}', "'")
        .to_lowercase();
    STOP_PHRASES.contains(&folded.as_str())
}

impl Answer {
    pub fn yes() -> Self {
        Answer { kind: AnswerKind::Yes, text: None }
    }

    pub fn no() -> Self {
        Answer { kind: AnswerKind::No, text: None }
    }

    pub fn stop() -> Self {
        Answer { kind: AnswerKind::Stop, text: None }
    }

    /// A typed reply; stop phrases become [`AnswerKind::Stop`].
    pub fn free_text(text: &str) -> Self {
        if is_stop_phrase(text) {
            return Answer::stop();
        }
        Answer {
            kind: AnswerKind::FreeText,
            text: Some(text.trim().to_string()),
        }
    }

    /// Reads a console reply: yes/no words, stop phrases, anything else is
    /// free text.
    pub fn parse(text: &str) -> Self {
        match text.trim().trim_end_matches(['.', '!']).to_lowercase().as_str() {
            "y" | "yes" | "yeah" | "yep" | "sure" => Answer::yes(),
            "n" | "no" | "nope" => Answer::no(),
            _ => Answer::free_text(text),
        }
    }

    /// Stop phrases typed as free text count as stop.
    pub fn normalized(self) -> Self {
        match (&self.kind, &self.text) {
            (AnswerKind::FreeText, Some(t)) => Answer::free_text(t),
            _ => self,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Method {
    DepthFirst = 1,
    EntityType = 2,
    Definition = 3,
    Content = 4,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DepthFirst, Method::EntityType, Method::Definition, Method::Content];

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Method {
    type Error = InsertionError;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            1 => Ok(Method::DepthFirst),
            2 => Ok(Method::EntityType),
            3 => Ok(Method::Definition),
            4 => Ok(Method::Content),
            _ => Err(InsertionError::UnknownMethod(n)),
        }
    }
}

impl From<Method> for u8 {
    fn from(m: Method) -> u8 {
        m.number()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SeekingStart,
    LocalDescent,
    ConfirmingAttach,
    CollectingDefinition,
    CollectingSentence,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Inserted,
    Declined,
    Aborted,
    Pending,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub concept: String,
    pub parent: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionContext {
    #[serde(default)]
    pub entity_type: Option<EntityType>,
    /// For method 4: a sentence already known, so it is not asked for.
    #[serde(default)]
    pub user_sentence: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InsertionError {
    #[error("{name:?} is already known as {existing:?}")]
    DuplicateConcept { name: String, existing: String },
    #[error("unknown insertion method {0}")]
    UnknownMethod(u8),
    #[error("a {answer:?} answer cannot reply to a {question:?} question")]
    IllegalAnswer { question: QuestionKind, answer: AnswerKind },
    #[error("the session is already finished")]
    SessionFinished,
    #[error("the ontology moved from revision {session} to {ontology} since the session started")]
    StaleRevision { session: u64, ontology: u64 },
    #[error("only an inserted, uncommitted session can be committed")]
    NotInserted,
    #[error("oracle answers for {concept:?} do not lead to {target:?}")]
    OracleInconsistent { concept: String, target: String },
    #[error("unknown target class {0:?}")]
    UnknownTarget(String),
    #[error("replay diverged at step {0}")]
    ReplayDiverged(usize),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("bad transcript: {0}")]
    Transcript(String),
}

impl InsertionError {
    /// Stable identifier for wire formats.
    pub fn code(&self) -> &'static str {
        match self {
            InsertionError::DuplicateConcept { .. } => "duplicate-concept",
            InsertionError::UnknownMethod(_) => "unknown-method",
            InsertionError::IllegalAnswer { .. } => "illegal-answer",
            InsertionError::SessionFinished => "session-finished",
            InsertionError::StaleRevision { .. } => "stale-revision",
            InsertionError::NotInserted => "not-inserted",
            InsertionError::OracleInconsistent { .. } => "oracle-inconsistent",
            InsertionError::UnknownTarget(_) => "unknown-target",
            InsertionError::ReplayDiverged(_) => "replay-diverged",
            InsertionError::Ontology(_) => "ontology",
            InsertionError::Tree(_) => "tree",
            InsertionError::Transcript(_) => "transcript",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionSession {
    pub id: String,
    pub concept: String,
    pub method: Method,
    /// Method actually running; differs from `method` after a fallback.
    pub active_method: Method,
    pub cursor: String,
    pub mode: Mode,
    /// Bottom is the concept, top the latest definition.
    pub definition_stack: Vec<String>,
    pub candidate_starts: Vec<String>,
    pub steps: usize,
    pub inserted: Vec<String>,
    pub placements: Vec<Placement>,
    pub transcript: Vec<TranscriptEntry>,
    pub outcome: Outcome,
    pub question: Option<Question>,
    pub base_revision: u64,
    pub fallback_used: bool,
    pub committed: bool,
    /// Concepts the current descent will place, most general first.
    pub chain: Vec<String>,
    child_index: usize,
    candidate_index: usize,
}

/// Opens a session and asks its first question.
pub fn start_session(
    concept: &str,
    method: Method,
    ctx: &SessionContext,
    onto: &Ontology,
    nlu: &dyn NluProvider,
) -> Result<InsertionSession, InsertionError> {
    let concept = concept.trim().to_string();
    if let Some(existing) = onto.find_concept(&concept) {
        return Err(InsertionError::DuplicateConcept {
            name: concept,
            existing: existing.to_string(),
        });
    }
    let mut s = InsertionSession {
        id: uuid::Uuid::new_v4().to_string(),
        concept: concept.clone(),
        method,
        active_method: method,
        cursor: onto.root_name().to_string(),
        mode: Mode::LocalDescent,
        definition_stack: vec![concept.clone()],
        candidate_starts: Vec::new(),
        steps: 0,
        inserted: Vec::new(),
        placements: Vec::new(),
        transcript: Vec::new(),
        outcome: Outcome::Pending,
        question: None,
        base_revision: onto.revision(),
        fallback_used: false,
        committed: false,
        chain: vec![concept.clone()],
        child_index: 0,
        candidate_index: 0,
    };
    match method {
        Method::DepthFirst => s.begin_descent(onto, onto.root_name()),
        Method::EntityType => {
            let start = ctx
                .entity_type
                .and_then(|t| onto.map_entity_type(t.as_str()))
                .filter(|c| *c != onto.root_name());
            match start {
                Some(class) => s.ask(Mode::SeekingStart, Question::closed(QuestionKind::ProposeStart, &concept, class, onto)),
                None => s.fallback(onto),
            }
        }
        Method::Definition => s.ask(Mode::CollectingDefinition, Question::ask_definition(&concept)),
        Method::Content => match &ctx.user_sentence {
            Some(sentence) => s.take_sentence(sentence, onto, nlu),
            None => s.ask(Mode::CollectingSentence, Question::ask_sentence(&concept)),
        },
    }
    Ok(s)
}

/// The definition a free-text answer gives: the slot of a definition
/// pattern when one matches, else the whole answer minus a leading article.
pub fn definition_word(answer: &str, nlu: &dyn NluProvider) -> String {
    let atomic = AtomicSentence::standalone(answer.trim());
    if let Some(hit) = nlu.match_intent(&atomic, IntentScope::Definition) {
        if let Some(slot) = hit.slots.last() {
            return nlu.lemmatize(&atomic.text[slot.range()]);
        }
    }
    let trimmed = answer.trim().trim_end_matches(['.', '!', '?']);
    let mut words: Vec<&str> = trimmed.split_whitespace().collect();
    while words.len() > 1 && ["a", "an", "the"].contains(&words[0].to_lowercase().as_str()) {
        words.remove(0);
    }
    nlu.lemmatize(&words.join(" "))
}

/// Non-root classes with a keyword in `sentence`, shallowest first, then in
/// declaration order.
pub fn keyword_starts(sentence: &str, onto: &Ontology) -> Vec<String> {
    let words = lemma_tokens(sentence);
    let mut out: Vec<(usize, usize, String)> = onto
        .classes()
        .enumerate()
        .filter(|(_, c)| c.parent.is_some())
        .filter(|(_, c)| class_keywords(onto, &c.name).iter().any(|k| mentions_keyword(&words, k)))
        .map(|(i, c)| (onto.depth(&c.name), i, c.name.clone()))
        .collect();
    out.sort();
    out.into_iter().map(|(_, _, n)| n).collect()
}

/// Start classes for method 4: keyword matches, category matches, or the
/// keyword matches lying at or under a category match.
pub fn candidate_starts(sentence: &str, onto: &Ontology, nlu: &dyn NluProvider) -> Vec<String> {
    let by_keyword = keyword_starts(sentence, onto);
    let paths: Vec<String> = nlu.classify_content(sentence).into_iter().map(|c| c.path).collect();
    let by_category = onto.classes_for_categories(&paths);
    match (by_keyword.is_empty(), by_category.is_empty()) {
        (false, true) => by_keyword,
        (true, false) => by_category,
        (false, false) => {
            // keyword classes inside a category class, ordered by that class
            let mut both: Vec<(usize, usize, String)> = by_keyword
                .into_iter()
                .enumerate()
                .filter_map(|(i, k)| {
                    let at = by_category.iter().position(|c| onto.is_ancestor_or_self(c, &k))?;
                    Some((at, i, k))
                })
                .collect();
            both.sort();
            both.into_iter().map(|(_, _, k)| k).collect()
        }
        (true, true) => Vec::new(),
    }
}

impl InsertionSession {
    pub fn question(&self) -> Option<&Question> {
        self.question.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.outcome != Outcome::Pending
    }

    /// Steps per inserted concept for method 3, plain steps otherwise.
    pub fn steps_per_inserted(&self) -> f64 {
        if self.method == Method::Definition && !self.inserted.is_empty() {
            self.steps as f64 / self.inserted.len() as f64
        } else {
            self.steps as f64
        }
    }

    fn ask(&mut self, mode: Mode, q: Question) {
        self.mode = mode;
        self.question = Some(q);
    }

    fn finish(&mut self, outcome: Outcome) {
        self.mode = Mode::Finished;
        self.question = None;
        self.outcome = outcome;
    }

    fn begin_descent(&mut self, onto: &Ontology, from: &str) {
        self.cursor = from.to_string();
        self.child_index = 0;
        self.descent_question(onto);
    }

    fn descent_question(&mut self, onto: &Ontology) {
        let children = onto.children(&self.cursor);
        let subject = self.chain[0].clone();
        if let Some(child) = children.get(self.child_index) {
            let q = Question::closed(QuestionKind::YesNo, &subject, &child.name, onto);
            self.ask(Mode::LocalDescent, q);
        } else {
            let kind = if children.is_empty() {
                QuestionKind::ProposeLeafAttach
            } else {
                QuestionKind::ProposeSiblingAttach
            };
            let q = Question::closed(kind, &subject, &self.cursor.clone(), onto);
            self.ask(Mode::ConfirmingAttach, q);
        }
    }

    fn fallback(&mut self, onto: &Ontology) {
        self.fallback_used = true;
        self.active_method = Method::DepthFirst;
        self.chain = vec![self.concept.clone()];
        self.begin_descent(onto, onto.root_name());
    }

    fn propose_candidate(&mut self, onto: &Ontology) {
        match self.candidate_starts.get(self.candidate_index) {
            Some(class) => {
                let q = Question::closed(QuestionKind::ProposeStart, &self.concept, &class.clone(), onto);
                self.ask(Mode::SeekingStart, q);
            }
            None => self.fallback(onto),
        }
    }

    fn take_definition(&mut self, text: &str, onto: &Ontology, nlu: &dyn NluProvider) {
        let word = definition_word(text, nlu);
        let key = concept_key(&word);
        if key.is_empty() || self.definition_stack.iter().any(|d| concept_key(d) == key) {
            return self.fallback(onto);
        }
        self.definition_stack.push(word.clone());
        match onto.find_concept(&word) {
            Some(class) if class == onto.root_name() => self.fallback(onto),
            Some(class) => {
                let class = class.to_string();
                let n = self.definition_stack.len();
                self.chain = self.definition_stack[..n - 1].iter().rev().cloned().collect();
                self.begin_descent(onto, &class);
            }
            None => self.ask(Mode::CollectingDefinition, Question::ask_definition(&word)),
        }
    }

    fn take_sentence(&mut self, text: &str, onto: &Ontology, nlu: &dyn NluProvider) {
        self.candidate_starts = candidate_starts(text, onto, nlu);
        self.candidate_index = 0;
        self.propose_candidate(onto);
    }

    /// Feeds one answer to the pending question. Returns the next question,
    /// or `None` once the session has finished.
    pub fn answer(
        &mut self,
        answer: Answer,
        onto: &Ontology,
        nlu: &dyn NluProvider,
    ) -> Result<Option<&Question>, InsertionError> {
        let Some(q) = self.question.clone() else {
            return Err(InsertionError::SessionFinished);
        };
        let a = answer.normalized();
        let legal = match a.kind {
            AnswerKind::Yes | AnswerKind::No => q.kind.is_closed(),
            AnswerKind::FreeText => !q.kind.is_closed() && a.text.as_deref().is_some_and(|t| !t.trim().is_empty()),
            AnswerKind::Stop => true,
        };
        if !legal {
            return Err(InsertionError::IllegalAnswer {
                question: q.kind,
                answer: a.kind,
            });
        }
        self.transcript.push(TranscriptEntry {
            step: self.transcript.len() + 1,
            question: q.clone(),
            answer: a.clone(),
        });
        let object = q.object.clone().unwrap_or_default();
        match (q.kind, a.kind) {
            (kind, AnswerKind::Stop) if kind.is_closed() => self.finish(Outcome::Aborted),
            (_, AnswerKind::Stop) => self.fallback(onto),
            (QuestionKind::YesNo | QuestionKind::ProposeStart, AnswerKind::Yes) => self.begin_descent(onto, &object),
            (QuestionKind::YesNo, _) => {
                self.child_index += 1;
                self.descent_question(onto);
            }
            (QuestionKind::ProposeStart, _) => {
                if self.active_method == Method::Content {
                    self.candidate_index += 1;
                    self.propose_candidate(onto);
                } else {
                    self.fallback(onto);
                }
            }
            (_, AnswerKind::Yes) => {
                let mut parent = object;
                for concept in self.chain.clone() {
                    self.placements.push(Placement {
                        concept: concept.clone(),
                        parent: parent.clone(),
                    });
                    self.inserted.push(concept.clone());
                    parent = concept;
                }
                self.finish(Outcome::Inserted);
            }
            (QuestionKind::ProposeLeafAttach | QuestionKind::ProposeSiblingAttach, _) => self.finish(Outcome::Declined),
            (QuestionKind::AskDefinition, _) => self.take_definition(a.text.as_deref().unwrap_or_default(), onto, nlu),
            (QuestionKind::AskSentence, _) => self.take_sentence(a.text.as_deref().unwrap_or_default(), onto, nlu),
        }
        self.steps = self.transcript.len() - usize::from(self.outcome == Outcome::Inserted);
        Ok(self.question.as_ref())
    }
}

/// Commits an inserted session: adds every placement to the ontology and
/// patches the tree to match. On a revision mismatch nothing is written and
/// the session is aborted.
pub fn attach_and_patch(
    session: &mut InsertionSession,
    onto: &mut Ontology,
    tree: &DialogueTree,
) -> Result<DialogueTree, InsertionError> {
    if session.outcome != Outcome::Inserted || session.committed {
        return Err(InsertionError::NotInserted);
    }
    for revision in [onto.revision(), tree.source_revision()] {
        if revision != session.base_revision {
            session.finish(Outcome::Aborted);
            return Err(InsertionError::StaleRevision {
                session: session.base_revision,
                ontology: revision,
            });
        }
    }
    let mut next = onto.clone();
    let mut patched = tree.clone();
    for p in &session.placements {
        next.insert_class(&p.concept, &p.parent)?;
        patched = patch_tree(&patched, &next, &p.concept)?;
    }
    *onto = next;
    session.committed = true;
    Ok(patched)
}

#[cfg(test)]
mod tests;
