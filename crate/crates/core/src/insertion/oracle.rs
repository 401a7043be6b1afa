use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    start_session, Answer, InsertionError, InsertionSession, Method, Outcome, Placement, Question, QuestionKind,
    SessionContext, TranscriptEntry,
};
use crate::nlu::NluProvider;
use crate::ontology::Ontology;

/// A scripted user who knows where the concept belongs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleUser {
    pub target_parent: String,
    /// Definitions to give, in order, keyed by the concept being inserted.
    #[serde(default)]
    pub definition_script: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub sentence_script: BTreeMap<String, String>,
}

impl OracleUser {
    pub fn new(target_parent: &str) -> Self {
        OracleUser {
            target_parent: target_parent.to_string(),
            ..Default::default()
        }
    }

    pub fn with_definitions(mut self, concept: &str, definitions: &[&str]) -> Self {
        self.definition_script
            .insert(concept.to_string(), definitions.iter().map(|d| d.to_string()).collect());
        self
    }

    pub fn with_sentence(mut self, concept: &str, sentence: &str) -> Self {
        self.sentence_script.insert(concept.to_string(), sentence.to_string());
        self
    }

    /// Yes to a class on the path to the target, yes to attaching exactly
    /// under the target, scripted text otherwise, and stop when the script
    /// has run out.
    pub fn reply(&self, session: &InsertionSession, question: &Question, onto: &Ontology) -> Answer {
        let object = question.object.as_deref().unwrap_or_default();
        let yes = |b: bool| if b { Answer::yes() } else { Answer::no() };
        match question.kind {
            QuestionKind::YesNo | QuestionKind::ProposeStart => {
                yes(onto.is_ancestor_or_self(object, &self.target_parent))
            }
            QuestionKind::ProposeLeafAttach | QuestionKind::ProposeSiblingAttach => yes(object == self.target_parent),
            QuestionKind::AskDefinition => {
                let asked = session
                    .transcript
                    .iter()
                    .filter(|e| e.question.kind == QuestionKind::AskDefinition)
                    .count();
                self.definition_script
                    .get(&session.concept)
                    .and_then(|d| d.get(asked))
                    .map_or_else(Answer::stop, |d| Answer::free_text(d))
            }
            QuestionKind::AskSentence => self
                .sentence_script
                .get(&session.concept)
                .map_or_else(Answer::stop, |s| Answer::free_text(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub transcript: Vec<TranscriptEntry>,
    pub steps: usize,
    pub steps_per_inserted: f64,
    pub inserted: Vec<String>,
    pub placements: Vec<Placement>,
    pub fallback_used: bool,
    pub outcome: Outcome,
}

/// Longer than any descent in an ontology of sane size.
const MAX_ANSWERS: usize = 10_000;

/// Runs a whole session against the oracle. The session must end with the
/// most general inserted concept placed directly under the target.
pub fn run_with_oracle(
    concept: &str,
    method: Method,
    ctx: &SessionContext,
    oracle: &OracleUser,
    onto: &Ontology,
    nlu: &dyn NluProvider,
) -> Result<OracleRun, InsertionError> {
    if !onto.has_class(&oracle.target_parent) {
        return Err(InsertionError::UnknownTarget(oracle.target_parent.clone()));
    }
    let mut session = start_session(concept, method, ctx, onto, nlu)?;
    while let Some(q) = session.question.clone() {
        if session.transcript.len() >= MAX_ANSWERS {
            break;
        }
        let a = oracle.reply(&session, &q, onto);
        session.answer(a, onto, nlu)?;
    }
    let on_target = session
        .placements
        .first()
        .is_some_and(|p| p.parent == oracle.target_parent);
    if session.outcome != Outcome::Inserted || !on_target {
        return Err(InsertionError::OracleInconsistent {
            concept: session.concept,
            target: oracle.target_parent.clone(),
        });
    }
    Ok(OracleRun {
        steps_per_inserted: session.steps_per_inserted(),
        steps: session.steps,
        transcript: session.transcript,
        inserted: session.inserted,
        placements: session.placements,
        fallback_used: session.fallback_used,
        outcome: session.outcome,
    })
}
