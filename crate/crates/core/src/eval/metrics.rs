use serde::{Deserialize, Serialize};

use crate::error::{DeedError, Result};

/// Confusion counts and derived scores; the positive class is "edited" (+1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let accuracy = ratio(tp + tn, tp + fp + tn + fn_);
        Metrics { tp, fp, tn, fn_, precision, recall, f1, accuracy }
    }

    /// True negative rate.
    pub fn specificity(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    /// F1 is the harmonic mean of P and R, and on a balanced test set the
    /// accuracy equals `(recall + specificity) / 2`.
    pub fn identities_hold(&self) -> bool {
        let harmonic_ok = if self.precision > 0.0 && self.recall > 0.0 {
            (1.0 / self.f1 - 0.5 * (1.0 / self.precision + 1.0 / self.recall)).abs() < 1e-9
        } else {
            self.f1 == 0.0
        };
        let balanced = self.tp + self.fn_ == self.tn + self.fp;
        let accuracy_ok = !balanced || (self.accuracy - 0.5 * (self.recall + self.specificity())).abs() < 1e-12;
        harmonic_ok && accuracy_ok
    }
}

pub fn compute_metrics(y_true: &[i8], y_pred: &[i8]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(DeedError::Parameter(format!(
            "label length mismatch: {} true vs {} predicted",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(DeedError::Parameter("no labels to score".into()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t > 0, p > 0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}
