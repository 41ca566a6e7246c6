use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{DeedError, Result};

/// Threshold of the constant stump: below every finite feature value.
pub const CONSTANT_THRESHOLD: f64 = f64::MIN;

/// Depth-1 decision tree: `polarity` if `x[feature_index] > threshold`, else `-polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stump {
    #[serde(rename = "feature")]
    pub feature_index: usize,
    pub threshold: f64,
    pub polarity: i8,
    /// Vote weight α inside an ensemble; 0 for a freshly fitted stump.
    #[serde(rename = "alpha")]
    pub weight: f64,
}

impl Stump {
    pub fn predict_one(&self, row: ArrayView1<f64>) -> i8 {
        if row[self.feature_index] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<i8> {
        x.rows().into_iter().map(|r| self.predict_one(r)).collect()
    }
}

/// Row indices of every column, sorted ascending by value. Computed once per
/// design matrix and reused across boosting rounds.
#[derive(Debug, Clone)]
pub(crate) struct ColumnOrder {
    pub(crate) columns: Vec<Vec<usize>>,
}

impl ColumnOrder {
    pub(crate) fn new(x: ArrayView2<f64>) -> Self {
        let columns = x
            .columns()
            .into_iter()
            .map(|col| {
                let mut idx: Vec<usize> = (0..col.len()).collect();
                idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
                idx
            })
            .collect();
        ColumnOrder { columns }
    }
}

pub(crate) fn check_labels(y: &[i8], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(DeedError::Parameter(format!("{} labels for {n} rows", y.len())));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(DeedError::Parameter("labels must be +1 or -1".into()));
    }
    Ok(())
}

pub(crate) fn check_design(x: ArrayView2<f64>, y: &[i8]) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(DeedError::Parameter("empty design matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DeedError::Parameter("design matrix contains non-finite values".into()));
    }
    check_labels(y, x.nrows())
}

pub(crate) fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(DeedError::Parameter(format!("{} weights for {n} rows", w.len())));
    }
    if w.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(DeedError::Parameter("weights must be finite and non-negative".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(DeedError::Parameter(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Finds the stump with minimum weighted 0-1 error.
///
/// Candidates per feature are a constant stump (threshold below the minimum)
/// and the midpoints between consecutive distinct values, each with both
/// polarities. Ties go to the smaller error, then the smaller feature index,
/// then the smaller threshold, then polarity +1.
pub fn fit_stump(x: ArrayView2<f64>, y: &[i8], w: &[f64]) -> Result<(Stump, f64)> {
    check_design(x, y)?;
    check_weights(w, x.nrows())?;
    Ok(fit_stump_sorted(x, y, w, &ColumnOrder::new(x)))
}

pub(crate) fn fit_stump_sorted(x: ArrayView2<f64>, y: &[i8], w: &[f64], order: &ColumnOrder) -> (Stump, f64) {
    let (mut pos_total, mut neg_total) = (0.0, 0.0);
    for (&yi, &wi) in y.iter().zip(w) {
        if yi > 0 {
            pos_total += wi;
        } else {
            neg_total += wi;
        }
    }

    let mut best = Stump { feature_index: 0, threshold: CONSTANT_THRESHOLD, polarity: 1, weight: 0.0 };
    let mut best_err = f64::INFINITY;

    for (feature, idx) in order.columns.iter().enumerate() {
        let col = x.column(feature);
        let mut consider = |threshold: f64, pos_left: f64, neg_left: f64| {
            // polarity +1 predicts +1 right of the threshold
            let err_plus = pos_left + (neg_total - neg_left);
            let err_minus = neg_left + (pos_total - pos_left);
            if err_plus < best_err {
                best_err = err_plus;
                best = Stump { feature_index: feature, threshold, polarity: 1, weight: 0.0 };
            }
            if err_minus < best_err {
                best_err = err_minus;
                best = Stump { feature_index: feature, threshold, polarity: -1, weight: 0.0 };
            }
        };
        consider(CONSTANT_THRESHOLD, 0.0, 0.0);
        let (mut pos_left, mut neg_left) = (0.0, 0.0);
        for k in 0..idx.len() {
            let i = idx[k];
            if y[i] > 0 {
                pos_left += w[i];
            } else {
                neg_left += w[i];
            }
            if k + 1 < idx.len() {
                let (lo, hi) = (col[i], col[idx[k + 1]]);
                if hi > lo {
                    consider(0.5 * (lo + hi), pos_left, neg_left);
                }
            }
        }
    }
    (best, best_err.clamp(0.0, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separable_line() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let (s, eps) = fit_stump(x.view(), &[-1, -1, 1, 1], &[0.25; 4]).unwrap();
        assert_eq!((s.feature_index, s.threshold, s.polarity, eps), (0, 2.5, 1, 0.0));
    }

    #[test]
    fn single_class_gives_constant_stump() {
        let x = array![[1.0, 5.0], [2.0, 6.0], [3.0, 7.0]];
        let w = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let w = [w[0], w[1], 1.0 - w[0] - w[1]];
        let (s, eps) = fit_stump(x.view(), &[1, 1, 1], &w).unwrap();
        assert_eq!((s.feature_index, s.threshold, s.polarity, eps), (0, CONSTANT_THRESHOLD, 1, 0.0));
        assert_eq!(s.predict(x.view()), vec![1, 1, 1]);
    }

    #[test]
    fn alternating_labels_tie_goes_to_smaller_threshold() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let (s, eps) = fit_stump(x.view(), &[1, -1, 1, -1], &[0.25; 4]).unwrap();
        assert_eq!(eps, 0.25);
        assert_eq!(s.threshold, 1.5);
        assert_eq!(s.polarity, -1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = ndarray::Array2::<f64>::zeros((0, 1));
        assert!(fit_stump(x.view(), &[], &[]).is_err());
        let x = array![[1.0], [2.0]];
        assert!(fit_stump(x.view(), &[1, -1], &[0.5, 0.6]).is_err());
        assert!(fit_stump(x.view(), &[1, 0], &[0.5, 0.5]).is_err());
        assert!(fit_stump(x.view(), &[1, -1], &[1.5, -0.5]).is_err());
    }
}
