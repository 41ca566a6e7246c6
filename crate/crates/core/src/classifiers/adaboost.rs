use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::stump::{check_design, fit_stump_sorted, ColumnOrder, Stump};
use super::tree::{fit_tree_sorted, TreeNode, MAX_TREE_DEPTH};
use crate::error::{DeedError, Result};

/// Errors are clamped to `[EPS_CLAMP, 1 - EPS_CLAMP]` before computing α.
pub const EPS_CLAMP: f64 = 1e-10;
/// A base learner this close to chance is discarded and boosting stops.
pub const CHANCE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostConfig {
    pub rounds: usize,
    /// 1 fits decision stumps; 2 and 3 fit weighted-Gini trees.
    pub base_depth: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig { rounds: 50, base_depth: 1 }
    }
}

/// One boosted base learner with its vote weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeakLearner {
    Stump(Stump),
    Tree { tree: TreeNode, alpha: f64 },
}

impl WeakLearner {
    pub fn alpha(&self) -> f64 {
        match self {
            WeakLearner::Stump(s) => s.weight,
            WeakLearner::Tree { alpha, .. } => *alpha,
        }
    }

    pub fn predict_one(&self, row: ArrayView1<f64>) -> i8 {
        match self {
            WeakLearner::Stump(s) => s.predict_one(row),
            WeakLearner::Tree { tree, .. } => tree.predict_one(row),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub n_features: usize,
    pub learners: Vec<WeakLearner>,
    /// Unclamped weighted error ε_t of each kept learner, in round order.
    #[serde(default)]
    pub round_errors: Vec<f64>,
}

/// `½ ln((1 - ε̃) / ε̃)` with ε̃ clamped away from 0 and 1.
pub fn learner_weight(eps: f64) -> f64 {
    let e = eps.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP);
    0.5 * ((1.0 - e) / e).ln()
}

impl AdaBoostModel {
    pub fn decision_one(&self, row: ArrayView1<f64>) -> f64 {
        self.learners.iter().map(|l| l.alpha() * l.predict_one(row) as f64).sum()
    }

    /// `sign(Σ α_t h_t(x))` with a zero score mapped to -1 (unedited).
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<i8> {
        x.rows()
            .into_iter()
            .map(|r| if self.decision_one(r) > 0.0 { 1 } else { -1 })
            .collect()
    }

    /// Training error of the partial ensemble after each round.
    pub fn staged_errors(&self, x: ArrayView2<f64>, y: &[i8]) -> Vec<f64> {
        let mut scores = vec![0.0; x.nrows()];
        self.learners
            .iter()
            .map(|learner| {
                let mut wrong = 0usize;
                for ((score, row), &yi) in scores.iter_mut().zip(x.rows()).zip(y) {
                    *score += learner.alpha() * learner.predict_one(row) as f64;
                    let pred = if *score > 0.0 { 1 } else { -1 };
                    wrong += usize::from(pred != yi);
                }
                wrong as f64 / y.len() as f64
            })
            .collect()
    }

    /// Running product of `2√(ε̃_t(1 - ε̃_t))`, the classic training-error bound.
    pub fn staged_bounds(&self) -> Vec<f64> {
        self.round_errors
            .iter()
            .scan(1.0, |acc, &eps| {
                let e = eps.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP);
                *acc *= 2.0 * (e * (1.0 - e)).sqrt();
                Some(*acc)
            })
            .collect()
    }

    pub(crate) fn check(&self) -> Result<()> {
        for (t, learner) in self.learners.iter().enumerate() {
            let ok = match learner {
                WeakLearner::Stump(s) => {
                    s.weight.is_finite()
                        && (s.polarity == 1 || s.polarity == -1)
                        && s.feature_index < self.n_features
                        && !s.threshold.is_nan()
                }
                WeakLearner::Tree { tree, alpha } => {
                    alpha.is_finite()
                        && tree.is_well_formed()
                        && tree.max_feature().is_none_or(|f| f < self.n_features)
                }
            };
            if !ok {
                return Err(DeedError::Format(format!("learner {t} is malformed")));
            }
        }
        Ok(())
    }
}

/// Discrete AdaBoost over stumps (`base_depth == 1`) or shallow trees.
///
/// Stops early when a learner is no better than chance (it is discarded) or
/// when a learner separates the weighted data perfectly (it is kept).
pub fn fit_adaboost(x: ArrayView2<f64>, y: &[i8], config: &AdaBoostConfig) -> Result<AdaBoostModel> {
    check_design(x, y)?;
    if x.nrows() < 2 || !y.contains(&1) || !y.contains(&-1) {
        return Err(DeedError::Parameter("AdaBoost needs at least two rows and both classes".into()));
    }
    if config.rounds == 0 {
        return Err(DeedError::Parameter("rounds must be positive".into()));
    }
    if !(1..=MAX_TREE_DEPTH).contains(&config.base_depth) {
        return Err(DeedError::Parameter(format!("base_depth must be in 1..={MAX_TREE_DEPTH}")));
    }

    let n = x.nrows();
    let order = ColumnOrder::new(x);
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoostModel { n_features: x.ncols(), learners: Vec::new(), round_errors: Vec::new() };

    for _ in 0..config.rounds {
        let (mut learner, preds, eps) = if config.base_depth == 1 {
            let (stump, eps) = fit_stump_sorted(x, y, &w, &order);
            (WeakLearner::Stump(stump), stump.predict(x), eps)
        } else {
            let tree = fit_tree_sorted(x, y, &w, &order, config.base_depth);
            let preds = tree.predict(x);
            let eps: f64 = preds.iter().zip(y).zip(&w).filter(|((p, t), _)| p != t).map(|(_, wi)| wi).sum();
            (WeakLearner::Tree { tree, alpha: 0.0 }, preds, eps)
        };
        if eps >= 0.5 - CHANCE_MARGIN {
            break;
        }
        let alpha = learner_weight(eps);
        match &mut learner {
            WeakLearner::Stump(s) => s.weight = alpha,
            WeakLearner::Tree { alpha: a, .. } => *a = alpha,
        }

        for ((wi, &p), &yi) in w.iter_mut().zip(&preds).zip(y) {
            *wi *= (-alpha * (yi * p) as f64).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= total);

        model.learners.push(learner);
        model.round_errors.push(eps);
        if eps < EPS_CLAMP {
            break;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separable_data_stops_after_one_round() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let model = fit_adaboost(x.view(), &[-1, -1, 1, 1], &AdaBoostConfig::default()).unwrap();
        assert_eq!(model.learners.len(), 1);
        let expected = 0.5 * ((1.0 - 1e-10) / 1e-10f64).ln();
        assert!((model.learners[0].alpha() - expected).abs() < 1e-6);
        assert!((expected - 11.5129).abs() < 1e-4);
    }

    #[test]
    fn closed_form_alpha() {
        assert!((learner_weight(0.25) - 0.5 * 3f64.ln()).abs() < 1e-12);
        // first round on alternating labels has ε = 0.25
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let model = fit_adaboost(x.view(), &[1, -1, 1, -1], &AdaBoostConfig { rounds: 1, base_depth: 1 }).unwrap();
        assert_eq!(model.round_errors, vec![0.25]);
        assert!((model.learners[0].alpha() - 0.5 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let x = array![[1.0]];
        assert!(matches!(
            fit_adaboost(x.view(), &[1], &AdaBoostConfig::default()),
            Err(DeedError::Parameter(_))
        ));
        let x = array![[1.0], [2.0]];
        assert!(fit_adaboost(x.view(), &[1, 1], &AdaBoostConfig::default()).is_err());
    }

    #[test]
    fn weighted_vote() {
        let model = AdaBoostModel {
            n_features: 1,
            learners: vec![
                WeakLearner::Stump(Stump { feature_index: 0, threshold: 0.0, polarity: 1, weight: 1.0 }),
                WeakLearner::Stump(Stump { feature_index: 0, threshold: 0.0, polarity: -1, weight: 0.5 }),
            ],
            round_errors: vec![],
        };
        assert_eq!(model.predict(array![[1.0]].view()), vec![1]);
        let empty = AdaBoostModel { n_features: 1, learners: vec![], round_errors: vec![] };
        assert_eq!(empty.predict(array![[1.0]].view()), vec![-1]);
    }

    #[test]
    fn trees_boost_xor() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [-1, -1, 1, 1];
        let model = fit_adaboost(x.view(), &y, &AdaBoostConfig { rounds: 10, base_depth: 2 }).unwrap();
        assert_eq!(model.predict(x.view()), y.to_vec());
    }

    #[test]
    fn chance_learner_stops_boosting() {
        let x = array![[1.0], [1.0]];
        let model = fit_adaboost(x.view(), &[1, -1], &AdaBoostConfig::default()).unwrap();
        assert!(model.learners.is_empty());
    }
}
