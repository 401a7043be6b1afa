//! The insertion experiment: every noun inserted with every method by the
//! oracle user, step tables, averages and pairwise signed-rank tests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{wilcoxon_signed_rank, EvalError, WilcoxonResult};
use crate::insertion::{run_with_oracle, InsertionError, Method, OracleUser, SessionContext};
use crate::nlu::{EntityType, NluProvider};
use crate::ontology::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounSpec {
    pub noun: String,
    pub target_parent: String,
    pub entity_type: EntityType,
}

#[derive(Deserialize)]
struct NounRow {
    noun: String,
    target_parent: String,
    entity_type: String,
}

/// Reads `noun,target_parent,entity_type` rows with a header line.
pub fn read_nouns_csv(text: &str) -> Result<Vec<NounSpec>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize::<NounRow>()
        .map(|row| {
            let row = row.map_err(|e| EvalError::Input(e.to_string()))?;
            let entity_type = row
                .entity_type
                .parse()
                .map_err(|e: crate::nlu::NluError| EvalError::Input(e.to_string()))?;
            Ok(NounSpec {
                noun: row.noun,
                target_parent: row.target_parent,
                entity_type,
            })
        })
        .collect()
}

/// The oracle's scripted answers for open questions, keyed by noun.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionScripts {
    #[serde(default)]
    pub definitions: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub sentences: BTreeMap<String, String>,
}

impl InsertionScripts {
    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Input(e.to_string()))
    }

    pub fn oracle(&self, target_parent: &str) -> OracleUser {
        OracleUser {
            target_parent: target_parent.to_string(),
            definition_script: self.definitions.clone(),
            sentence_script: self.sentences.clone(),
        }
    }
}

/// Nouns whose entity type maps to no class, and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cohort {
    Other,
    Mapped,
}

impl Cohort {
    pub fn of(entity_type: EntityType, onto: &Ontology) -> Self {
        match onto.map_entity_type(entity_type.as_str()) {
            Some(_) => Cohort::Mapped,
            None => Cohort::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::Other => "other",
            Cohort::Mapped => "mapped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub noun: String,
    pub target_parent: String,
    pub entity_type: EntityType,
    pub cohort: Cohort,
    /// Method 3 holds steps per inserted concept.
    pub steps_by_method: BTreeMap<Method, f64>,
    pub fallback_used: BTreeMap<Method, bool>,
    /// Concepts method 3 inserted.
    pub m3_inserted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub cohort: Cohort,
    pub a: Method,
    pub b: Method,
    pub result: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionEvalReport {
    pub records: Vec<StepRecord>,
    pub averages: BTreeMap<Method, f64>,
    pub cohort_averages: BTreeMap<Cohort, BTreeMap<Method, f64>>,
    pub tests: Vec<PairwiseTest>,
}

fn averages<'a>(records: impl Iterator<Item = &'a StepRecord> + Clone) -> BTreeMap<Method, f64> {
    let n = records.clone().count();
    Method::ALL
        .into_iter()
        .filter(|_| n > 0)
        .map(|m| (m, records.clone().map(|r| r.steps_by_method[&m]).sum::<f64>() / n as f64))
        .collect()
}

/// Inserts every noun with every method against a fresh copy of `onto`
/// and compares methods pairwise inside each cohort.
pub fn run_insertion_eval(
    nouns: &[NounSpec],
    onto: &Ontology,
    scripts: &InsertionScripts,
    nlu: &dyn NluProvider,
) -> Result<InsertionEvalReport, InsertionError> {
    let mut records = Vec::new();
    for spec in nouns {
        let oracle = scripts.oracle(&spec.target_parent);
        let ctx = SessionContext {
            entity_type: Some(spec.entity_type),
            user_sentence: None,
        };
        let mut record = StepRecord {
            noun: spec.noun.clone(),
            target_parent: spec.target_parent.clone(),
            entity_type: spec.entity_type,
            cohort: Cohort::of(spec.entity_type, onto),
            steps_by_method: BTreeMap::new(),
            fallback_used: BTreeMap::new(),
            m3_inserted: 0,
        };
        for method in Method::ALL {
            let pristine = onto.clone();
            let run = run_with_oracle(&spec.noun, method, &ctx, &oracle, &pristine, nlu)?;
            record.steps_by_method.insert(method, run.steps_per_inserted);
            record.fallback_used.insert(method, run.fallback_used);
            if method == Method::Definition {
                record.m3_inserted = run.inserted.len();
            }
        }
        records.push(record);
    }

    let mut tests = Vec::new();
    let mut cohort_averages = BTreeMap::new();
    for cohort in [Cohort::Other, Cohort::Mapped] {
        let members = records.iter().filter(|r| r.cohort == cohort);
        if members.clone().next().is_none() {
            continue;
        }
        cohort_averages.insert(cohort, averages(members.clone()));
        let column = |m: Method| members.clone().map(|r| r.steps_by_method[&m]).collect::<Vec<_>>();
        for (i, &a) in Method::ALL.iter().enumerate() {
            for &b in &Method::ALL[i + 1..] {
                let result = wilcoxon_signed_rank(&column(a), &column(b)).expect("cohort columns are paired and non-empty");
                tests.push(PairwiseTest { cohort, a, b, result });
            }
        }
    }

    Ok(InsertionEvalReport {
        averages: averages(records.iter()),
        records,
        cohort_averages,
        tests,
    })
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"))
}

/// One row per noun: steps for each method, method 3's inserted count and
/// the fallback flags.
pub fn step_table_csv(records: &[StepRecord]) -> String {
    let mut w = writer();
    let header = [
        "noun", "target_parent", "entity_type", "m1", "m2", "m3", "m3_inserted", "m4", "fallback_m1", "fallback_m2",
        "fallback_m3", "fallback_m4",
    ];
    w.write_record(header).expect("in-memory writer");
    for r in records {
        let steps = |m: Method| r.steps_by_method.get(&m).map_or(String::new(), |s| s.to_string());
        let fell = |m: Method| r.fallback_used.get(&m).copied().unwrap_or(false).to_string();
        w.write_record([
            r.noun.clone(),
            r.target_parent.clone(),
            r.entity_type.to_string(),
            steps(Method::DepthFirst),
            steps(Method::EntityType),
            steps(Method::Definition),
            r.m3_inserted.to_string(),
            steps(Method::Content),
            fell(Method::DepthFirst),
            fell(Method::EntityType),
            fell(Method::Definition),
            fell(Method::Content),
        ])
        .expect("in-memory writer");
    }
    finish(w)
}

pub fn wilcoxon_table_csv(tests: &[PairwiseTest]) -> String {
    let mut w = writer();
    w.write_record(["cohort", "pair", "w", "z", "p", "n_effective", "reliable"])
        .expect("in-memory writer");
    for t in tests {
        w.write_record([
            t.cohort.as_str().to_string(),
            format!("m{}-m{}", t.a, t.b),
            t.result.w.to_string(),
            opt(t.result.z),
            opt(t.result.p),
            t.result.n_effective.to_string(),
            t.result.reliable.to_string(),
        ])
        .expect("in-memory writer");
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn nouns_csv_parses_tags_loosely() {
        let nouns = read_nouns_csv("noun,target_parent,entity_type\nkiwi, Fruit ,Food & Beverages\n").unwrap();
        assert_eq!(nouns[0].target_parent, "Fruit");
        assert_eq!(nouns[0].entity_type, EntityType::FoodAndBeverages);
        assert!(read_nouns_csv("noun,target_parent,entity_type\nkiwi,Fruit,FRUITY\n").is_err());
    }

    #[test]
    fn single_noun_averages_are_its_steps() {
        let onto = fixtures::standard();
        let nlu = fixtures::local_nlu();
        let nouns = &fixtures::eval_nouns()[..1];
        let report = run_insertion_eval(nouns, &onto, &fixtures::eval_scripts(), &nlu).unwrap();
        assert_eq!(report.averages, report.records[0].steps_by_method);
    }

    #[test]
    fn csv_exports_have_one_row_per_item() {
        let onto = fixtures::standard();
        let nlu = fixtures::local_nlu();
        let report = run_insertion_eval(&fixtures::eval_nouns(), &onto, &fixtures::eval_scripts(), &nlu).unwrap();
        let steps = step_table_csv(&report.records);
        assert_eq!(steps.lines().count(), 7);
        assert!(steps.starts_with("noun,target_parent,entity_type,m1,m2,m3,m3_inserted,m4,"));
        assert!(steps.contains("orange juice,Beverage,FOOD_AND_BEVERAGES,11,6,2.5,2,7,"));
        let tests = wilcoxon_table_csv(&report.tests);
        assert_eq!(tests.lines().count(), 1 + 12);
        assert!(tests.contains("other,m1-m2,0,undefined,undefined,0,false"));
    }
}
