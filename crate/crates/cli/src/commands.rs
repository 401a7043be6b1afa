//! The batch subcommands. Each returns its output instead of printing it.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use ontogrow::eval::{
    compute_metrics, read_nouns_csv, run_insertion_eval, step_table_csv, wilcoxon_table_csv, InsertionScripts,
    MetricsReport,
};
use ontogrow::extraction::{extract_concepts, run_recognition_eval, RecognitionReport};
use ontogrow::fixtures;
use ontogrow::insertion::{
    run_with_oracle, start_session, write_transcript, Answer, InsertionSession, Method, OracleUser, SessionContext,
};
use ontogrow::nlu::{load_corpus_jsonl, CategoryRules, EntityLexicon, EntityType, Intent, LocalNlu, TaggedUtterance};
use ontogrow::ontology::{load_ontology, Ontology};
use ontogrow::tree::build_tree;

/// NLU resources; the bundled ones are used for any left out.
#[derive(Debug, Clone, Default, Args)]
pub struct NluArgs {
    /// Tagged training utterances, one JSON object per line.
    #[arg(long, global = true)]
    pub training: Option<PathBuf>,
    /// Entity gazetteer, `{"phrase": "TYPE"}`.
    #[arg(long, global = true)]
    pub entities: Option<PathBuf>,
    /// Content category rules.
    #[arg(long, global = true)]
    pub categories: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

impl NluArgs {
    pub fn load(&self) -> Result<LocalNlu> {
        let corpus = match &self.training {
            Some(p) => load_corpus_jsonl(&read(p)?)?,
            None => fixtures::training_corpus(),
        };
        let entities = match &self.entities {
            Some(p) => EntityLexicon::from_json(&read(p)?)?,
            None => fixtures::entity_lexicon(),
        };
        let categories = match &self.categories {
            Some(p) => CategoryRules::from_json(&read(p)?)?,
            None => fixtures::category_rules(),
        };
        Ok(LocalNlu::train(&corpus, entities, categories)?)
    }
}

pub fn load_ontology_file(path: &Path) -> Result<Ontology> {
    Ok(load_ontology(&read(path)?)?)
}

pub fn build_tree_cmd(ontology: &Path) -> Result<String> {
    Ok(build_tree(&load_ontology_file(ontology)?).dump_json())
}

/// Lines of a corpus: tagged JSON objects, or plain sentences.
fn read_replies(text: &str) -> Result<Vec<TaggedUtterance>> {
    if text.trim_start().starts_with('{') {
        return Ok(load_corpus_jsonl(text)?);
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            Ok(TaggedUtterance {
                question_id: String::new(),
                intent: Intent::Preferences,
                text: l.to_string(),
                tags: Vec::new(),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct RecognitionSummary {
    pub report: RecognitionReport,
    pub metrics: Option<MetricsReport>,
}

pub fn recognition_summary(ontology: &Ontology, corpus: &[TaggedUtterance], nlu: &LocalNlu) -> RecognitionSummary {
    let report = run_recognition_eval(corpus, nlu, ontology);
    let metrics = compute_metrics(&report.counts).ok();
    RecognitionSummary { report, metrics }
}

/// One JSON line of candidates per reply; with `report`, also writes the
/// labelled recognition report there.
pub fn extract_cmd(ontology: &Path, corpus: &Path, report: Option<&Path>, nlu: &LocalNlu) -> Result<String> {
    let onto = load_ontology_file(ontology)?;
    let replies = read_replies(&read(corpus)?)?;
    let mut out = String::new();
    for reply in &replies {
        let result = extract_concepts(&reply.text, nlu, &onto);
        let line = serde_json::json!({
            "text": reply.text,
            "best": result.best.as_ref().map(|c| &c.lemma),
            "candidates": result.candidates,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    if let Some(path) = report {
        let summary = recognition_summary(&onto, &replies, nlu);
        fs::write(path, serde_json::to_string_pretty(&summary)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(out)
}

pub fn eval_recognition_cmd(ontology: &Path, corpus: &Path, nlu: &LocalNlu) -> Result<String> {
    let onto = load_ontology_file(ontology)?;
    let replies = load_corpus_jsonl(&read(corpus)?)?;
    let summary = recognition_summary(&onto, &replies, nlu);
    Ok(serde_json::to_string_pretty(&summary)?)
}

pub struct EvalOutput {
    pub steps_csv: String,
    pub wilcoxon_csv: String,
    pub averages: String,
}

pub fn eval_insertion_cmd(ontology: &Path, nouns: &Path, scripts: &Path, nlu: &LocalNlu) -> Result<EvalOutput> {
    let onto = load_ontology_file(ontology)?;
    let nouns = read_nouns_csv(&read(nouns)?)?;
    let scripts = InsertionScripts::from_json(&read(scripts)?)?;
    let report = run_insertion_eval(&nouns, &onto, &scripts, nlu)?;
    let averages = serde_json::json!({
        "all": report.averages,
        "by_cohort": report.cohort_averages,
    });
    Ok(EvalOutput {
        steps_csv: step_table_csv(&report.records),
        wilcoxon_csv: wilcoxon_table_csv(&report.tests),
        averages: serde_json::to_string_pretty(&averages)?,
    })
}

#[derive(Debug, Clone, Default)]
pub struct InsertOptions {
    pub method: u8,
    pub entity_type: Option<String>,
    pub sentence: Option<String>,
}

impl InsertOptions {
    fn context(&self) -> Result<(Method, SessionContext)> {
        let method = Method::try_from(self.method)?;
        let entity_type = self.entity_type.as_deref().map(str::parse::<EntityType>).transpose()?;
        Ok((
            method,
            SessionContext {
                entity_type,
                user_sentence: self.sentence.clone(),
            },
        ))
    }
}

/// Runs the oracle in `script` (an [`OracleUser`] as JSON) and returns the
/// transcript followed by a summary line.
pub fn insert_with_oracle(ontology: &Path, concept: &str, opts: &InsertOptions, script: &Path, nlu: &LocalNlu) -> Result<String> {
    let onto = load_ontology_file(ontology)?;
    let oracle: OracleUser = serde_json::from_str(&read(script)?).context("parsing oracle script")?;
    let (method, ctx) = opts.context()?;
    let run = run_with_oracle(concept, method, &ctx, &oracle, &onto, nlu)?;
    let summary = serde_json::json!({
        "steps": run.steps,
        "steps_per_inserted": run.steps_per_inserted,
        "inserted": run.inserted,
        "fallback_used": run.fallback_used,
    });
    Ok(format!("{}{summary}\n", write_transcript(&run.transcript)))
}

/// Asks on `output` and reads answers from `input` until the session ends.
pub fn insert_interactive(
    onto: &Ontology,
    concept: &str,
    opts: &InsertOptions,
    nlu: &LocalNlu,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> Result<InsertionSession> {
    let (method, ctx) = opts.context()?;
    let mut session = start_session(concept, method, &ctx, onto, nlu)?;
    while let Some(q) = session.question.clone() {
        writeln!(output, "{}", q.text)?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            bail!("input ended before the session finished");
        }
        if let Err(e) = session.answer(Answer::parse(&line), onto, nlu) {
            writeln!(output, "({e})")?;
        }
    }
    writeln!(output, "outcome: {:?}, steps: {}, inserted: {:?}", session.outcome, session.steps, session.inserted)?;
    Ok(session)
}
