use serde::{Deserialize, Serialize};

use super::{start_session, Answer, InsertionError, InsertionSession, Method, Question, SessionContext};
use crate::nlu::NluProvider;
use crate::ontology::Ontology;

/// One answered question. `step` counts from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step: usize,
    pub question: Question,
    pub answer: Answer,
}

/// One JSON record per line.
pub fn write_transcript(entries: &[TranscriptEntry]) -> String {
    entries
        .iter()
        .map(|e| serde_json::to_string(e).expect("transcript entries serialize") + "\n")
        .collect()
}

pub fn read_transcript(text: &str) -> Result<Vec<TranscriptEntry>, InsertionError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| InsertionError::Transcript(e.to_string())))
        .collect()
}

/// Re-runs a session from recorded answers, checking that every question
/// comes out exactly as recorded.
pub fn replay(
    concept: &str,
    method: Method,
    ctx: &SessionContext,
    entries: &[TranscriptEntry],
    onto: &Ontology,
    nlu: &dyn NluProvider,
) -> Result<InsertionSession, InsertionError> {
    let mut session = start_session(concept, method, ctx, onto, nlu)?;
    for e in entries {
        if session.question.as_ref() != Some(&e.question) {
            return Err(InsertionError::ReplayDiverged(e.step));
        }
        session.answer(e.answer.clone(), onto, nlu)?;
    }
    Ok(session)
}
