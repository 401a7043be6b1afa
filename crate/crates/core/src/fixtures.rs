//! Bundled sample data: two ontologies, the NLU resources and small corpora.
//!
//! Everything here is compiled into the library so examples and tests run
//! without touching the filesystem.

use crate::eval::{read_nouns_csv, InsertionScripts, NounSpec};
use crate::nlu::{load_corpus_jsonl, CategoryRules, EntityLexicon, LocalNlu, TaggedUtterance};
use crate::ontology::{load_ontology, Ontology};

/// Seven beverage classes with the English tea/milk instances.
pub const BEVERAGES_ONTOLOGY: &str = include_str!("../fixtures/beverages.ontology.json");
/// 52 classes, four levels deep, with entity-type and category maps.
pub const STANDARD_ONTOLOGY: &str = include_str!("../fixtures/standard.ontology.json");
pub const TRAINING_CORPUS: &str = include_str!("../fixtures/training.jsonl");
/// Two tagged childhood replies, eight atomic sentences in total.
pub const WORKED_REPLIES: &str = include_str!("../fixtures/worked_replies.jsonl");
pub const ENTITY_LEXICON: &str = include_str!("../fixtures/entities.json");
pub const CATEGORY_RULES: &str = include_str!("../fixtures/categories.json");
/// One sentence per line, each with at least one intent slot.
pub const FILTER_CORPUS: &str = include_str!("../fixtures/filter_corpus.txt");

/// Six nouns with their intended parents, for the insertion experiment.
pub const EVAL_NOUNS: &str = include_str!("../fixtures/eval_nouns.csv");
/// Definition and sentence scripts for [`EVAL_NOUNS`].
pub const EVAL_SCRIPTS: &str = include_str!("../fixtures/eval_scripts.json");

pub fn beverages() -> Ontology {
    load_ontology(BEVERAGES_ONTOLOGY).expect("bundled ontology is valid")
}

pub fn standard() -> Ontology {
    load_ontology(STANDARD_ONTOLOGY).expect("bundled ontology is valid")
}

pub fn training_corpus() -> Vec<TaggedUtterance> {
    load_corpus_jsonl(TRAINING_CORPUS).expect("bundled corpus is valid")
}

pub fn worked_replies() -> Vec<TaggedUtterance> {
    load_corpus_jsonl(WORKED_REPLIES).expect("bundled corpus is valid")
}

pub fn entity_lexicon() -> EntityLexicon {
    EntityLexicon::from_json(ENTITY_LEXICON).expect("bundled lexicon is valid")
}

pub fn category_rules() -> CategoryRules {
    CategoryRules::from_json(CATEGORY_RULES).expect("bundled rules are valid")
}

/// The local provider trained on the bundled corpus and lexicons.
pub fn local_nlu() -> LocalNlu {
    LocalNlu::train(&training_corpus(), entity_lexicon(), category_rules()).expect("bundled corpus trains")
}

pub fn filter_sentences() -> Vec<&'static str> {
    FILTER_CORPUS.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

pub fn eval_nouns() -> Vec<NounSpec> {
    read_nouns_csv(EVAL_NOUNS).expect("bundled nouns are valid")
}

pub fn eval_scripts() -> InsertionScripts {
    InsertionScripts::from_json(EVAL_SCRIPTS).expect("bundled scripts are valid")
}
