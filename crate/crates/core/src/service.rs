//! The conversation turn loop and the session store behind the HTTP API.
//!
//! A turn first looks for a topic the sentence triggers. Failing that, the
//! sentence is mined for a new concept and, if one turns up, an insertion
//! session starts and the following turns answer its questions. Once the
//! concept is committed the user is asked for a sentence about it, which is
//! stored as personal knowledge. With nothing to do, the robot follows the
//! current branch of the tree.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{extract_concepts, ExtractionResult};
use crate::insertion::{
    attach_and_patch, start_session, Answer, AnswerKind, InsertionError, InsertionSession, Method, Outcome, Question,
    SessionContext, TranscriptEntry,
};
use crate::nlu::NluProvider;
use crate::ontology::{Layer, Ontology, OntologyError};
use crate::tree::{build_tree, patch_tree, DialogueTree, TopicNode, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Methods tried in order for an extracted concept; the next one starts
    /// when a session ends without inserting.
    pub method_policy: Vec<Method>,
    /// Owner of stored sentences and of likeliness lookups.
    pub user: String,
    /// Append-only JSON-lines record of every answered question.
    pub journal: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            method_policy: vec![Method::DepthFirst],
            user: "user".to_string(),
            journal: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error(transparent)]
    Insertion(#[from] InsertionError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("journal: {0}")]
    Journal(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown-session",
            ServiceError::Insertion(e) => e.code(),
            ServiceError::Ontology(_) => "ontology",
            ServiceError::Tree(_) => "tree",
            ServiceError::Journal(_) => "journal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnAction {
    TopicTriggered,
    BranchFollowed,
    ExtractionStarted,
    /// The turn answered a question of the running insertion session.
    InsertionContinued,
    /// The turn gave the sentence asked for after an insertion.
    SentenceStored,
    Nothing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnResult {
    pub action: TurnAction,
    pub topic: Option<String>,
    pub session_id: Option<String>,
    pub robot_utterance: String,
}

/// What the client needs to render a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub concept: String,
    pub method: Method,
    pub active_method: Method,
    pub question: Option<Question>,
    pub step_count: usize,
    pub definition_stack: Vec<String>,
    pub cursor: String,
    pub transcript: Vec<TranscriptEntry>,
    pub outcome: Outcome,
    pub inserted: Vec<String>,
    pub fallback_used: bool,
    pub committed: bool,
}

impl From<&InsertionSession> for SessionView {
    fn from(s: &InsertionSession) -> Self {
        SessionView {
            session_id: s.id.clone(),
            concept: s.concept.clone(),
            method: s.method,
            active_method: s.active_method,
            question: s.question.clone(),
            step_count: s.steps,
            definition_stack: s.definition_stack.clone(),
            cursor: s.cursor.clone(),
            transcript: s.transcript.clone(),
            outcome: s.outcome,
            inserted: s.inserted.clone(),
            fallback_used: s.fallback_used,
            committed: s.committed,
        }
    }
}

struct StoredSession {
    session: InsertionSession,
    /// The ontology the session's questions are computed against.
    snapshot: Arc<Ontology>,
}

/// Sessions by id. Finished sessions stay until purged.
#[derive(Default)]
pub struct SessionStore {
    sessions: HashMap<String, StoredSession>,
}

impl SessionStore {
    pub fn get(&self, id: &str) -> Option<&InsertionSession> {
        self.sessions.get(id).map(|s| &s.session)
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    /// Drops finished sessions and returns how many went.
    pub fn purge_finished(&mut self) -> usize {
        let before = self.sessions.len();
        self.sessions.retain(|_, s| !s.session.is_finished());
        before - self.sessions.len()
    }
}

#[derive(Default)]
struct Conversation {
    topic: Option<String>,
    visited: BTreeSet<String>,
    session: Option<String>,
    concept_context: Option<(String, SessionContext)>,
    methods_left: Vec<Method>,
    awaiting_sentence: Option<String>,
}

pub struct Engine {
    ontology: Arc<Ontology>,
    tree: DialogueTree,
    nlu: Box<dyn NluProvider + Send + Sync>,
    config: EngineConfig,
    sessions: SessionStore,
    conversation: Conversation,
    said: BTreeMap<String, usize>,
}

impl Engine {
    pub fn new(ontology: Ontology, nlu: Box<dyn NluProvider + Send + Sync>, config: EngineConfig) -> Self {
        let tree = build_tree(&ontology);
        Engine {
            ontology: Arc::new(ontology),
            tree,
            nlu,
            config,
            sessions: SessionStore::default(),
            conversation: Conversation::default(),
            said: BTreeMap::new(),
        }
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn tree(&self) -> &DialogueTree {
        &self.tree
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }

    pub fn sessions_mut(&mut self) -> &mut SessionStore {
        &mut self.sessions
    }

    pub fn nlu(&self) -> &dyn NluProvider {
        self.nlu.as_ref()
    }

    pub fn extract(&self, reply: &str) -> ExtractionResult {
        extract_concepts(reply, self.nlu.as_ref(), &self.ontology)
    }

    pub fn create_session(
        &mut self,
        concept: &str,
        method: Method,
        ctx: &SessionContext,
    ) -> Result<&InsertionSession, ServiceError> {
        let snapshot = Arc::clone(&self.ontology);
        let session = start_session(concept, method, ctx, &snapshot, self.nlu.as_ref())?;
        let id = session.id.clone();
        self.sessions.sessions.insert(id.clone(), StoredSession { session, snapshot });
        Ok(&self.sessions.sessions[&id].session)
    }

    pub fn session(&self, id: &str) -> Option<&InsertionSession> {
        self.sessions.get(id)
    }

    /// Answers a session's pending question and commits it as soon as it
    /// has inserted something.
    pub fn answer_session(&mut self, id: &str, answer: Answer) -> Result<&InsertionSession, ServiceError> {
        let stored = self
            .sessions
            .sessions
            .get_mut(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))?;
        stored.session.answer(answer, &stored.snapshot, self.nlu.as_ref())?;
        if let (Some(path), Some(entry)) = (&self.config.journal, stored.session.transcript.last()) {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            let record = serde_json::json!({ "session_id": id, "entry": entry });
            writeln!(file, "{record}")?;
        }
        if stored.session.outcome == Outcome::Inserted {
            let onto = Arc::make_mut(&mut self.ontology);
            self.tree = attach_and_patch(&mut stored.session, onto, &self.tree)?;
        }
        Ok(&self.sessions.sessions[id].session)
    }

    /// Stores a sentence about `class` as the configured user's knowledge.
    pub fn store_sentence(&mut self, class: &str, sentence: &str) -> Result<String, ServiceError> {
        let onto = Arc::make_mut(&mut self.ontology);
        let id = onto.attach_sentence(class, sentence, Layer::PS, &self.config.user)?;
        self.tree = patch_tree(&self.tree, onto, class)?;
        Ok(id)
    }

    /// The node's sentences in turn, or a generic prompt.
    fn utter(&mut self, topic: &str) -> String {
        let node: &TopicNode = self.tree.node(topic).expect("topic from this tree");
        let sentences: Vec<&str> = node.all_sentences().collect();
        if sentences.is_empty() {
            return format!("Let's talk about {}.", node.display_name.to_lowercase());
        }
        let k = self.said.entry(topic.to_string()).or_default();
        let line = sentences[*k % sentences.len()].to_string();
        *k += 1;
        line
    }

    fn follow_branch(&mut self, action: TurnAction, prefix: &str) -> TurnResult {
        let from = self
            .conversation
            .topic
            .clone()
            .filter(|t| self.tree.node(t).is_some())
            .unwrap_or_else(|| self.tree.root().topic.clone());
        let next = self
            .tree
            .next_topic(&from, &self.config.user, &mut self.conversation.visited)
            .expect("topic from this tree")
            .topic
            .clone();
        self.conversation.topic = Some(next.clone());
        let line = self.utter(&next);
        TurnResult {
            action,
            topic: Some(next),
            session_id: None,
            robot_utterance: format!("{prefix}{line}"),
        }
    }

    fn start_for_concept(&mut self) -> Option<TurnResult> {
        let (concept, ctx) = self.conversation.concept_context.clone()?;
        while !self.conversation.methods_left.is_empty() {
            let method = self.conversation.methods_left.remove(0);
            let Ok(session) = self.create_session(&concept, method, &ctx) else {
                continue;
            };
            let id = session.id.clone();
            let question = session.question.as_ref().map(|q| q.text.clone()).unwrap_or_default();
            self.conversation.session = Some(id.clone());
            return Some(TurnResult {
                action: TurnAction::ExtractionStarted,
                topic: None,
                session_id: Some(id),
                robot_utterance: question,
            });
        }
        None
    }

    fn continue_session(&mut self, id: String, text: &str) -> TurnResult {
        let pending = self.sessions.get(&id).and_then(|s| s.question.clone());
        let Some(question) = pending else {
            self.conversation.session = None;
            return self.follow_branch(TurnAction::BranchFollowed, "");
        };
        let answer = Answer::parse(text);
        let fits = match answer.kind {
            AnswerKind::Yes | AnswerKind::No => question.kind.is_closed(),
            AnswerKind::FreeText => !question.kind.is_closed(),
            AnswerKind::Stop => true,
        };
        let asking_again = TurnResult {
            action: TurnAction::InsertionContinued,
            topic: None,
            session_id: Some(id.clone()),
            robot_utterance: question.text.clone(),
        };
        if !fits {
            return asking_again;
        }
        let failed = self.answer_session(&id, answer).is_err();
        let session = self.sessions.get(&id).expect("known session").clone();
        if failed && !session.is_finished() {
            return asking_again;
        }
        match session.outcome {
            Outcome::Pending => TurnResult {
                robot_utterance: session.question.map(|q| q.text).unwrap_or_default(),
                ..asking_again
            },
            Outcome::Inserted if session.committed => {
                self.conversation.session = None;
                self.conversation.concept_context = None;
                self.conversation.methods_left.clear();
                let concept = session.inserted.last().expect("inserted session").clone();
                self.conversation.topic = Some(concept.clone());
                self.conversation.awaiting_sentence = Some(concept.clone());
                TurnResult {
                    action: TurnAction::InsertionContinued,
                    topic: Some(concept.clone()),
                    session_id: Some(id),
                    robot_utterance: format!("Please tell me a sentence about {concept}"),
                }
            }
            _ => {
                self.conversation.session = None;
                if let Some(next) = self.start_for_concept() {
                    return next;
                }
                self.conversation.concept_context = None;
                self.follow_branch(TurnAction::BranchFollowed, "")
            }
        }
    }

    /// One user turn of the conversation.
    pub fn handle_user_turn(&mut self, sentence: &str) -> TurnResult {
        let text = sentence.trim();
        if let Some(id) = self.conversation.session.clone() {
            return self.continue_session(id, text);
        }
        if let Some(concept) = self.conversation.awaiting_sentence.take() {
            let stopped = Answer::free_text(text).kind == AnswerKind::Stop;
            if !text.is_empty() && !stopped && self.store_sentence(&concept, text).is_ok() {
                return TurnResult {
                    action: TurnAction::SentenceStored,
                    topic: Some(concept),
                    session_id: None,
                    robot_utterance: "Thank you, I will remember that.".to_string(),
                };
            }
            return self.follow_branch(TurnAction::BranchFollowed, "");
        }
        if text.is_empty() {
            return self.follow_branch(TurnAction::Nothing, "");
        }
        if let Some(node) = self.tree.trigger_topic(text) {
            let topic = node.topic.clone();
            self.conversation.topic = Some(topic.clone());
            self.conversation.visited.insert(topic.clone());
            let line = self.utter(&topic);
            return TurnResult {
                action: TurnAction::TopicTriggered,
                topic: Some(topic),
                session_id: None,
                robot_utterance: line,
            };
        }
        if let Some(best) = self.extract(text).best {
            let ctx = SessionContext {
                entity_type: Some(best.entity_type),
                user_sentence: Some(text.to_string()),
            };
            self.conversation.concept_context = Some((best.lemma.clone(), ctx));
            self.conversation.methods_left = self.config.method_policy.clone();
            if let Some(started) = self.start_for_concept() {
                return started;
            }
            self.conversation.concept_context = None;
        }
        self.follow_branch(TurnAction::BranchFollowed, "")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn engine(methods: &[Method]) -> Engine {
        let config = EngineConfig {
            method_policy: methods.to_vec(),
            ..EngineConfig::default()
        };
        Engine::new(fixtures::standard(), Box::new(fixtures::local_nlu()), config)
    }

    #[test]
    fn a_known_topic_is_triggered() {
        let mut e = engine(&[Method::DepthFirst]);
        let r = e.handle_user_turn("I want to talk about my wife");
        assert_eq!(r.action, TurnAction::TopicTriggered);
        assert_eq!(r.topic.as_deref(), Some("Wife"));
    }

    #[test]
    fn empty_turn_follows_the_branch() {
        let mut e = engine(&[Method::DepthFirst]);
        let r = e.handle_user_turn("   ");
        assert_eq!(r.action, TurnAction::Nothing);
        assert!(r.topic.is_some());
        assert!(!r.robot_utterance.is_empty());
    }

    #[test]
    fn a_new_concept_starts_a_session() {
        let mut e = engine(&[Method::Definition]);
        let r = e.handle_user_turn("I love to drink orange juice in the morning");
        assert_eq!(r.action, TurnAction::ExtractionStarted);
        let s = e.session(r.session_id.as_deref().unwrap()).unwrap();
        assert_eq!(s.concept, "orange juice");
        assert_eq!(
            r.robot_utterance,
            "I'm not sure what you are talking about. Please, try to define orange juice with one word"
        );
        // a yes to an open question is asked again
        let again = e.handle_user_turn("yes");
        assert_eq!(again.robot_utterance, r.robot_utterance);
        assert!(e.session(r.session_id.as_deref().unwrap()).unwrap().transcript.is_empty());
    }

    #[test]
    fn declined_session_moves_to_the_next_method() {
        let mut e = engine(&[Method::DepthFirst, Method::Definition]);
        let r = e.handle_user_turn("I love to drink orange juice in the morning");
        assert_eq!(r.action, TurnAction::ExtractionStarted);
        let r = e.handle_user_turn("stop");
        assert_eq!(r.action, TurnAction::ExtractionStarted);
        assert!(r.robot_utterance.contains("define orange juice"));
        let r = e.handle_user_turn("stop");
        assert_eq!(r.action, TurnAction::InsertionContinued);
        let r = e.handle_user_turn("stop");
        assert_eq!(r.action, TurnAction::BranchFollowed);
    }

    #[test]
    fn journal_gets_one_line_per_answer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let mut e = Engine::new(
            fixtures::beverages(),
            Box::new(fixtures::local_nlu()),
            EngineConfig {
                journal: Some(path.clone()),
                ..EngineConfig::default()
            },
        );
        let id = e
            .create_session("lemonade", Method::DepthFirst, &SessionContext::default())
            .unwrap()
            .id
            .clone();
        for a in [Answer::yes(), Answer::no()] {
            e.answer_session(&id, a).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().all(|l| l.contains(&id)));
    }

    #[test]
    fn committed_sessions_show_up_in_the_tree() {
        let mut e = Engine::new(fixtures::beverages(), Box::new(fixtures::local_nlu()), EngineConfig::default());
        let id = e
            .create_session("lemonade", Method::DepthFirst, &SessionContext::default())
            .unwrap()
            .id
            .clone();
        for a in [Answer::yes(), Answer::no(), Answer::no(), Answer::no(), Answer::yes()] {
            e.answer_session(&id, a).unwrap();
        }
        assert!(e.session(&id).unwrap().committed);
        assert_eq!(e.tree(), &build_tree(e.ontology()));
        assert_eq!(e.tree().trigger_topic("I like lemonade").unwrap().topic, "lemonade");
        assert_eq!(e.sessions_mut().purge_finished(), 1);
        assert!(e.sessions().is_empty());
    }

    #[test]
    fn concurrent_commit_goes_stale() {
        let mut e = Engine::new(fixtures::beverages(), Box::new(fixtures::local_nlu()), EngineConfig::default());
        let ctx = SessionContext::default();
        let a = e.create_session("lemonade", Method::DepthFirst, &ctx).unwrap().id.clone();
        let b = e.create_session("soda", Method::DepthFirst, &ctx).unwrap().id.clone();
        let script = [Answer::yes(), Answer::no(), Answer::no(), Answer::no()];
        for id in [&a, &b] {
            for x in script.clone() {
                e.answer_session(id, x).unwrap();
            }
        }
        e.answer_session(&a, Answer::yes()).unwrap();
        let err = e.answer_session(&b, Answer::yes()).unwrap_err();
        assert_eq!(err.code(), "stale-revision");
        assert_eq!(e.session(&b).unwrap().outcome, Outcome::Aborted);
        assert!(!e.ontology().has_class("soda"));
    }
}
