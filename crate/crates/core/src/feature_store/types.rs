use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{DeedError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Slack above 1 allowed for the sum of a stored pd vector (f32 re-quantization).
pub const PD_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Unedited,
    Edited,
}

impl Label {
    pub fn to_byte(self) -> u8 {
        match self {
            Label::Unedited => 0,
            Label::Edited => 1,
        }
    }

    pub fn from_byte(byte: u8) -> Option<Label> {
        match byte {
            0 => Some(Label::Unedited),
            1 => Some(Label::Edited),
            _ => None,
        }
    }

    /// Classifier encoding: +1 edited, -1 unedited.
    pub fn sign(self) -> i8 {
        match self {
            Label::Unedited => -1,
            Label::Edited => 1,
        }
    }

    pub fn from_sign(sign: i8) -> Label {
        if sign > 0 {
            Label::Edited
        } else {
            Label::Unedited
        }
    }
}

/// Features of one fact: last-token hidden state and sorted top-k probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub fact_id: u32,
    pub label: Label,
    pub hs: Vec<f32>,
    pub pd: Vec<f32>,
}

impl FeatureRecord {
    /// Checks the per-record invariants against the declared dimensions.
    pub fn check(&self, hs_dim: usize, pd_k: usize) -> std::result::Result<(), String> {
        if self.hs.len() != hs_dim {
            return Err(format!("hs has length {}, expected {hs_dim}", self.hs.len()));
        }
        if self.pd.len() != pd_k {
            return Err(format!("pd has length {}, expected {pd_k}", self.pd.len()));
        }
        if self.hs.iter().any(|v| !v.is_finite()) {
            return Err("hs contains a non-finite value".to_string());
        }
        if self.pd.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err("pd entry outside [0, 1]".to_string());
        }
        if self.pd.windows(2).any(|w| w[1] > w[0]) {
            return Err("pd not sorted".to_string());
        }
        let sum: f64 = self.pd.iter().map(|&p| p as f64).sum();
        if sum > 1.0 + PD_SUM_TOLERANCE {
            return Err(format!("pd sums to {sum}, above 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSetHeader {
    #[serde(rename = "version")]
    pub format_version: u32,
    pub model_id: String,
    /// ROME, MEMIT, MEND, MALMEN, NONE or SYNTH-*.
    pub editor: String,
    pub dataset: String,
    /// Transformer block the hidden states come from; -1 is the last block.
    pub layer_index: i64,
    pub token_position: String,
    pub hs_dim: usize,
    pub pd_k: usize,
    pub record_count: usize,
}

impl FeatureSetHeader {
    pub fn new(
        model_id: impl Into<String>,
        editor: impl Into<String>,
        dataset: impl Into<String>,
        layer_index: i64,
        hs_dim: usize,
        pd_k: usize,
    ) -> Self {
        FeatureSetHeader {
            format_version: FORMAT_VERSION,
            model_id: model_id.into(),
            editor: editor.into(),
            dataset: dataset.into(),
            layer_index,
            token_position: "last".to_string(),
            hs_dim,
            pd_k,
            record_count: 0,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(DeedError::Format(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        if self.token_position != "last" {
            return Err(DeedError::Format(format!(
                "unsupported token position {:?}",
                self.token_position
            )));
        }
        if self.hs_dim == 0 || self.pd_k == 0 {
            return Err(DeedError::Validation("hs_dim and pd_k must be positive".into()));
        }
        Ok(())
    }
}

/// A labeled collection of feature records sharing one provenance header.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub header: FeatureSetHeader,
    pub records: Vec<FeatureRecord>,
}

impl FeatureSet {
    /// Builds a set, setting `record_count` from `records`.
    pub fn new(mut header: FeatureSetHeader, records: Vec<FeatureRecord>) -> Self {
        header.record_count = records.len();
        FeatureSet { header, records }
    }

    /// Same header, different records.
    pub fn with_records(&self, records: Vec<FeatureRecord>) -> Self {
        FeatureSet::new(self.header.clone(), records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// (unedited, edited) record counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let edited = self.records.iter().filter(|r| r.label == Label::Edited).count();
        (self.records.len() - edited, edited)
    }

    pub fn fact_ids(&self) -> HashSet<u32> {
        self.records.iter().map(|r| r.fact_id).collect()
    }

    /// Checks every invariant; the error names the first offending record.
    pub fn validate(&self) -> Result<()> {
        self.header.check()?;
        if self.header.record_count != self.records.len() {
            return Err(DeedError::Validation(format!(
                "header declares {} records but set holds {}",
                self.header.record_count,
                self.records.len()
            )));
        }
        let mut seen = HashSet::with_capacity(self.records.len());
        for (i, rec) in self.records.iter().enumerate() {
            if let Err(msg) = rec.check(self.header.hs_dim, self.header.pd_k) {
                return Err(DeedError::Validation(format!(
                    "record {i} (fact_id {}): {msg}",
                    rec.fact_id
                )));
            }
            if !seen.insert(rec.fact_id) {
                return Err(DeedError::Validation(format!(
                    "record {i}: duplicate fact_id {}",
                    rec.fact_id
                )));
            }
        }
        Ok(())
    }
}
