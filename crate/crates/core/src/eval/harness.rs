use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, Metrics};
use crate::classifiers::{fit_detector, DetectorConfig, TrainedDetector};
use crate::error::{DeedError, Result};
use crate::feature_store::{assemble_vectors, FeatureMode, FeatureSet, FeatureSetHeader};

/// Version of the report column set. Bump when columns change.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    Id,
    Cd,
    CrossDataset,
    SameObject,
    SweepPoint,
    LayerPoint,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Id => "ID",
            ExperimentKind::Cd => "CD",
            ExperimentKind::CrossDataset => "CROSS_DATASET",
            ExperimentKind::SameObject => "SAME_OBJECT",
            ExperimentKind::SweepPoint => "SWEEP_POINT",
            ExperimentKind::LayerPoint => "LAYER_POINT",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = DeedError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "ID" => Ok(ExperimentKind::Id),
            "CD" => Ok(ExperimentKind::Cd),
            "CROSS_DATASET" => Ok(ExperimentKind::CrossDataset),
            "SAME_OBJECT" => Ok(ExperimentKind::SameObject),
            "SWEEP_POINT" => Ok(ExperimentKind::SweepPoint),
            "LAYER_POINT" => Ok(ExperimentKind::LayerPoint),
            _ => Err(DeedError::Parameter(format!("unknown experiment kind '{s}'"))),
        }
    }
}

/// A different dataset wins over a different model; matching headers are
/// in-domain.
pub fn infer_kind(train: &FeatureSetHeader, test: &FeatureSetHeader) -> ExperimentKind {
    if train.dataset != test.dataset {
        ExperimentKind::CrossDataset
    } else if train.model_id != test.model_id {
        ExperimentKind::Cd
    } else {
        ExperimentKind::Id
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub feature_mode: FeatureMode,
    pub truncate_k: Option<usize>,
    pub detector: DetectorConfig,
    /// Replaces the header-inferred experiment kind.
    pub kind: Option<ExperimentKind>,
    /// Recorded in the report; the split seed when the sets came from one.
    pub seed: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            feature_mode: FeatureMode::HsPd,
            truncate_k: None,
            detector: DetectorConfig::default(),
            kind: None,
            seed: None,
        }
    }
}

/// One row of results. Flat so it maps directly onto a CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub experiment_kind: ExperimentKind,
    pub feature_mode: FeatureMode,
    pub truncate_k: Option<usize>,
    pub detector: String,
    pub seed: Option<u64>,
    pub n_train: usize,
    pub n_test: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub train_model_id: String,
    pub train_editor: String,
    pub train_dataset: String,
    pub train_layer_index: i64,
    pub test_model_id: String,
    pub test_editor: String,
    pub test_dataset: String,
    pub test_layer_index: i64,
}

impl EvalReport {
    pub fn metrics(&self) -> Metrics {
        Metrics::from_counts(self.tp, self.fp, self.tn, self.fn_)
    }
}

fn check_compatible(train: &FeatureSetHeader, test: &FeatureSetHeader, config: &EvalConfig) -> Result<()> {
    let mode = config.feature_mode;
    if mode.uses_hs() && train.hs_dim != test.hs_dim {
        return Err(DeedError::Parameter(format!(
            "dimension mismatch: train hs_dim {} vs test hs_dim {}",
            train.hs_dim, test.hs_dim
        )));
    }
    if mode.uses_pd() && config.truncate_k.is_none() && train.pd_k != test.pd_k {
        return Err(DeedError::Parameter(format!(
            "dimension mismatch: train pd_k {} vs test pd_k {}; pass a truncation to compare",
            train.pd_k, test.pd_k
        )));
    }
    Ok(())
}

fn check_disjoint(train: &FeatureSet, test: &FeatureSet) -> Result<()> {
    let train_ids = train.fact_ids();
    let mut shared: Vec<u32> = test.fact_ids().intersection(&train_ids).copied().collect();
    if shared.is_empty() {
        return Ok(());
    }
    shared.sort_unstable();
    let shown: Vec<String> = shared.iter().take(5).map(u32::to_string).collect();
    Err(DeedError::Contamination(format!(
        "{} fact_id(s) appear in both train and test (e.g. {})",
        shared.len(),
        shown.join(", ")
    )))
}

pub fn train_detector(train: &FeatureSet, config: &EvalConfig) -> Result<TrainedDetector> {
    let (x, y) = assemble_vectors(train, config.feature_mode, config.truncate_k)?;
    let model = fit_detector(x.view(), &y, &config.detector)?;
    Ok(TrainedDetector {
        model,
        feature_mode: Some(config.feature_mode),
        truncate_k: config.truncate_k,
        provenance: Some(train.header.clone()),
    })
}

/// Predictions for every record of `set`, using the detector's own feature recipe.
pub fn predict_set(detector: &TrainedDetector, set: &FeatureSet) -> Result<Vec<i8>> {
    let mode = detector.feature_mode.unwrap_or(FeatureMode::HsPd);
    let (x, _) = assemble_vectors(set, mode, detector.truncate_k)?;
    detector.model.predict(x.view())
}

/// Fit on `train`, score on `test`.
pub fn run_eval(train: &FeatureSet, test: &FeatureSet, config: &EvalConfig) -> Result<EvalReport> {
    check_disjoint(train, test)?;
    check_compatible(&train.header, &test.header, config)?;
    if test.is_empty() {
        return Err(DeedError::Parameter("test set is empty".into()));
    }
    let detector = train_detector(train, config)?;
    let y_pred = predict_set(&detector, test)?;
    let y_true: Vec<i8> = test.records.iter().map(|r| r.label.sign()).collect();
    let m = compute_metrics(&y_true, &y_pred)?;
    if !m.identities_hold() {
        return Err(DeedError::Validation(format!("metric identities violated: {m:?}")));
    }
    log::debug!(
        "eval {} on {} -> f1 {:.4} ({} train, {} test)",
        config.detector,
        config.feature_mode,
        m.f1,
        train.len(),
        test.len()
    );
    let (tr, te) = (&train.header, &test.header);
    Ok(EvalReport {
        schema: REPORT_SCHEMA,
        experiment_kind: config.kind.unwrap_or_else(|| infer_kind(tr, te)),
        feature_mode: config.feature_mode,
        truncate_k: config.truncate_k,
        detector: config.detector.to_string(),
        seed: config.seed,
        n_train: train.len(),
        n_test: test.len(),
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        accuracy: m.accuracy,
        tp: m.tp,
        fp: m.fp,
        tn: m.tn,
        fn_: m.fn_,
        train_model_id: tr.model_id.clone(),
        train_editor: tr.editor.clone(),
        train_dataset: tr.dataset.clone(),
        train_layer_index: tr.layer_index,
        test_model_id: te.model_id.clone(),
        test_editor: te.editor.clone(),
        test_dataset: te.dataset.clone(),
        test_layer_index: te.layer_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(model: &str, dataset: &str) -> FeatureSetHeader {
        FeatureSetHeader::new(model, "ROME", dataset, 5, 4, 3)
    }

    #[test]
    fn kind_inference() {
        assert_eq!(infer_kind(&header("gpt2-xl", "zsre"), &header("gpt2-xl", "zsre")), ExperimentKind::Id);
        assert_eq!(infer_kind(&header("gpt2-xl", "zsre"), &header("gpt2-xl-v2", "zsre")), ExperimentKind::Cd);
        assert_eq!(
            infer_kind(&header("gpt2-xl", "zsre"), &header("gpt2-xl-v2", "counterfact")),
            ExperimentKind::CrossDataset
        );
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [
            ExperimentKind::Id,
            ExperimentKind::Cd,
            ExperimentKind::CrossDataset,
            ExperimentKind::SameObject,
            ExperimentKind::SweepPoint,
            ExperimentKind::LayerPoint,
        ] {
            assert_eq!(k.to_string().parse::<ExperimentKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
    }
}
