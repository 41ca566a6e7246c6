//! From-scratch edit detectors: decision stumps and shallow trees, discrete
//! AdaBoost over them, and L1-regularized logistic regression.

mod adaboost;
mod linear;
mod model_io;
mod stump;
mod tree;

use std::fmt;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use adaboost::{fit_adaboost, learner_weight, AdaBoostConfig, AdaBoostModel, WeakLearner, CHANCE_MARGIN, EPS_CLAMP};
pub use linear::{fit_linear_l1, logistic_l1_objective, proximal_step, soft_threshold, LinearL1Config, LinearL1Model};
pub use model_io::{deserialize_detector, deserialize_model, serialize_detector, serialize_model, MODEL_FORMAT_VERSION};
pub use stump::{fit_stump, Stump, CONSTANT_THRESHOLD};
pub use tree::{fit_tree, TreeNode, MAX_TREE_DEPTH};

use crate::error::{DeedError, Result};
use crate::feature_store::{FeatureMode, FeatureSetHeader};

/// A fitted classifier of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    AdaBoost(AdaBoostModel),
    LinearL1(LinearL1Model),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::AdaBoost(m) => m.n_features,
            Model::LinearL1(m) => m.n_features(),
        }
    }

    /// ±1 predictions; fails if the column count differs from training.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<i8>> {
        if x.ncols() != self.n_features() {
            return Err(DeedError::Parameter(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.ncols()
            )));
        }
        Ok(match self {
            Model::AdaBoost(m) => m.predict(x),
            Model::LinearL1(m) => m.predict(x),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorConfig {
    AdaBoost(AdaBoostConfig),
    LinearL1(LinearL1Config),
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig::AdaBoost(AdaBoostConfig::default())
    }
}

impl fmt::Display for DetectorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorConfig::AdaBoost(c) => write!(f, "adaboost(rounds={},depth={})", c.rounds, c.base_depth),
            DetectorConfig::LinearL1(c) => write!(f, "linear_l1(lambda={})", c.lambda),
        }
    }
}

pub fn fit_detector(x: ArrayView2<f64>, y: &[i8], config: &DetectorConfig) -> Result<Model> {
    match config {
        DetectorConfig::AdaBoost(c) => fit_adaboost(x, y, c).map(Model::AdaBoost),
        DetectorConfig::LinearL1(c) => fit_linear_l1(x, y, c).map(Model::LinearL1),
    }
}

/// A model together with the feature recipe and data it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedDetector {
    pub model: Model,
    pub feature_mode: Option<FeatureMode>,
    pub truncate_k: Option<usize>,
    pub provenance: Option<FeatureSetHeader>,
}
