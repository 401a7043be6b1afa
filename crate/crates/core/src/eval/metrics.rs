use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::extraction::OutcomeLabel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a OutcomeLabel>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for l in labels {
            cm.record(*l);
        }
        cm
    }

    pub fn record(&mut self, label: OutcomeLabel) {
        match label {
            OutcomeLabel::TP => self.tp += 1,
            OutcomeLabel::FP => self.fp += 1,
            OutcomeLabel::FN => self.fn_ += 1,
            OutcomeLabel::TN => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Metrics with a zero denominator are `None`, never zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub mcc: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let ConfusionMatrix { tp, fp, fn_, tn } = *cm;
    let product = [tp + fp, tp + fn_, tn + fp, tn + fn_]
        .iter()
        .map(|&x| x as f64)
        .product::<f64>();
    let mcc = (product > 0.0).then(|| {
        let num = (tp as f64) * (tn as f64) - (fp as f64) * (fn_ as f64);
        (num / product.sqrt()).clamp(-1.0, 1.0)
    });
    Ok(MetricsReport {
        accuracy: (tp + tn) as f64 / cm.total() as f64,
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        precision: ratio(tp, tp + fp),
        mcc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_classifier() {
        let m = compute_metrics(&ConfusionMatrix::new(7, 0, 0, 3)).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.mcc, Some(1.0));
    }

    #[test]
    fn undefined_is_not_zero() {
        let m = compute_metrics(&ConfusionMatrix::new(0, 0, 5, 5)).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.precision, None);
        assert_eq!(m.mcc, None);
    }

    #[test]
    fn empty_matrix() {
        assert!(matches!(compute_metrics(&ConfusionMatrix::default()), Err(EvalError::EmptyMatrix)));
    }

    #[test]
    fn serialized_field_names() {
        let json = serde_json::to_string(&ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        assert_eq!(json, r#"{"tp":1,"fp":2,"fn":3,"tn":4}"#);
    }
}
