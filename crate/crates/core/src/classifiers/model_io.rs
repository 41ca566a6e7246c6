use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AdaBoostModel, LinearL1Model, Model, TrainedDetector};
use crate::error::{DeedError, Result};
use crate::feature_store::{FeatureMode, FeatureSetHeader};

pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum Body {
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostModel),
    #[serde(rename = "linear_l1")]
    LinearL1(LinearL1Model),
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u64,
    #[serde(flatten)]
    body: Body,
    #[serde(default)]
    feature_mode: Option<FeatureMode>,
    #[serde(default)]
    truncate_k: Option<usize>,
    #[serde(default)]
    provenance: Option<FeatureSetHeader>,
}

pub fn serialize_detector(detector: &TrainedDetector) -> Result<String> {
    let body = match &detector.model {
        Model::AdaBoost(m) => Body::AdaBoost(m.clone()),
        Model::LinearL1(m) => Body::LinearL1(m.clone()),
    };
    let doc = Document {
        version: MODEL_FORMAT_VERSION,
        body,
        feature_mode: detector.feature_mode,
        truncate_k: detector.truncate_k,
        provenance: detector.provenance.clone(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| DeedError::Format(e.to_string()))
}

pub fn deserialize_detector(text: &str) -> Result<TrainedDetector> {
    let value: Value = serde_json::from_str(text).map_err(|e| DeedError::Format(format!("model document: {e}")))?;
    match value.get("version").and_then(Value::as_u64) {
        Some(MODEL_FORMAT_VERSION) => {}
        Some(v) => return Err(DeedError::Format(format!("unknown model format version {v}"))),
        None => return Err(DeedError::Format("model document has no version".into())),
    }
    let doc: Document = serde_json::from_value(value).map_err(|e| DeedError::Format(format!("model document: {e}")))?;
    let model = match doc.body {
        Body::AdaBoost(m) => {
            m.check()?;
            Model::AdaBoost(m)
        }
        Body::LinearL1(m) => {
            m.check()?;
            Model::LinearL1(m)
        }
    };
    Ok(TrainedDetector {
        model,
        feature_mode: doc.feature_mode,
        truncate_k: doc.truncate_k,
        provenance: doc.provenance,
    })
}

pub fn serialize_model(model: &Model) -> Result<String> {
    serialize_detector(&TrainedDetector { model: model.clone(), feature_mode: None, truncate_k: None, provenance: None })
}

pub fn deserialize_model(text: &str) -> Result<Model> {
    deserialize_detector(text).map(|d| d.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit_adaboost, AdaBoostConfig, Stump, WeakLearner};
    use ndarray::array;

    #[test]
    fn stump_document_decodes_to_separable_model() {
        let doc = r#"{"version":1,"type":"adaboost","n_features":1,
            "learners":[{"feature":0,"threshold":2.5,"polarity":1,"alpha":11.5129}]}"#;
        let model = deserialize_model(doc).unwrap();
        let Model::AdaBoost(m) = &model else { panic!("wrong family") };
        assert_eq!(
            m.learners,
            vec![WeakLearner::Stump(Stump { feature_index: 0, threshold: 2.5, polarity: 1, weight: 11.5129 })]
        );
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let fitted = fit_adaboost(x.view(), &[-1, -1, 1, 1], &AdaBoostConfig::default()).unwrap();
        assert_eq!(model.predict(x.view()).unwrap(), fitted.predict(x.view()));
    }

    #[test]
    fn tampered_type_and_version_rejected() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let fitted = fit_adaboost(x.view(), &[-1, -1, 1, 1], &AdaBoostConfig::default()).unwrap();
        let text = serialize_model(&Model::AdaBoost(fitted)).unwrap();
        let bad_type = text.replace("\"adaboost\"", "\"gradient_boost\"");
        assert!(matches!(deserialize_model(&bad_type), Err(DeedError::Format(_))));
        let bad_version = text.replace("\"version\": 1", "\"version\": 7");
        assert!(matches!(deserialize_model(&bad_version), Err(DeedError::Format(_))));
    }

    #[test]
    fn malformed_learner_rejected() {
        let doc = r#"{"version":1,"type":"adaboost","n_features":1,
            "learners":[{"feature":3,"threshold":2.5,"polarity":1,"alpha":1.0}]}"#;
        assert!(matches!(deserialize_model(doc), Err(DeedError::Format(_))));
    }
}
