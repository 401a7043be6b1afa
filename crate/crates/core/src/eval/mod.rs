//! Recognition metrics, the signed-rank test and the insertion experiment.

pub mod experiment;
pub mod metrics;
pub mod wilcoxon;

use thiserror::Error;

pub use experiment::{
    read_nouns_csv, run_insertion_eval, step_table_csv, wilcoxon_table_csv, Cohort, InsertionEvalReport, InsertionScripts,
    NounSpec, PairwiseTest, StepRecord,
};
pub use metrics::{compute_metrics, ConfusionMatrix, MetricsReport};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("paired samples are empty")]
    EmptySample,
    #[error("bad input: {0}")]
    Input(String),
}
