use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::harness::{run_eval, EvalConfig, EvalReport, ExperimentKind};
use super::split::{make_split, SplitSpec};
use crate::classifiers::{DetectorConfig, LinearL1Config};
use crate::error::{DeedError, Result};
use crate::feature_store::{read_feature_file, FeatureMode, FeatureSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerPoint {
    pub layer_index: i64,
    pub report: EvalReport,
}

fn check_consistent(sets: &[FeatureSet]) -> Result<()> {
    let Some(first) = sets.first() else {
        return Err(DeedError::Parameter("layer sweep needs at least one feature set".into()));
    };
    let h0 = &first.header;
    for (i, s) in sets.iter().enumerate().skip(1) {
        let h = &s.header;
        for (field, a, b) in [
            ("model_id", &h0.model_id, &h.model_id),
            ("editor", &h0.editor, &h.editor),
            ("dataset", &h0.dataset, &h.dataset),
        ] {
            if a != b {
                return Err(DeedError::Parameter(format!("layer set {i} has {field} '{b}', expected '{a}'")));
            }
        }
        if h.hs_dim != h0.hs_dim {
            return Err(DeedError::Parameter(format!("layer set {i} has hs_dim {}, expected {}", h.hs_dim, h0.hs_dim)));
        }
        if sets[..i].iter().any(|p| p.header.layer_index == h.layer_index) {
            return Err(DeedError::Parameter(format!("layer_index {} appears twice", h.layer_index)));
        }
    }
    Ok(())
}

/// Per layer: split with `spec`, fit L1 logistic regression on HS only, and
/// score. Points come back sorted by layer index.
pub fn layer_sweep(sets: &[FeatureSet], lambda: f64, spec: &SplitSpec) -> Result<Vec<LayerPoint>> {
    check_consistent(sets)?;
    let config = EvalConfig {
        feature_mode: FeatureMode::Hs,
        truncate_k: None,
        detector: DetectorConfig::LinearL1(LinearL1Config { lambda, ..Default::default() }),
        kind: Some(ExperimentKind::LayerPoint),
        seed: Some(spec.seed),
    };
    let mut points: Vec<LayerPoint> = sets
        .par_iter()
        .map(|set| {
            let (train, test) = make_split(set, spec)?;
            let report = run_eval(&train, &test, &config)?;
            Ok(LayerPoint { layer_index: set.header.layer_index, report })
        })
        .collect::<Result<_>>()?;
    points.sort_by_key(|p| p.layer_index);
    Ok(points)
}

pub fn layer_sweep_files<P: AsRef<Path>>(paths: &[P], lambda: f64, spec: &SplitSpec) -> Result<Vec<LayerPoint>> {
    let sets = paths.iter().map(read_feature_file).collect::<Result<Vec<_>>>()?;
    layer_sweep(&sets, lambda, spec)
}

#[derive(Serialize)]
struct LayerRow {
    layer_index: i64,
    f1: f64,
}

/// `layer_index,f1`, one row per layer.
pub fn write_layer_csv(points: &[LayerPoint], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(LayerRow { layer_index: p.layer_index, f1: p.report.f1 })?;
    }
    w.flush()?;
    Ok(())
}
