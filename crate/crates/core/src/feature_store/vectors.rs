use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::types::{FeatureSet, FeatureSetHeader};
use crate::error::{DeedError, Result};

/// Which features feed the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureMode {
    #[serde(rename = "HS")]
    Hs,
    #[serde(rename = "PD")]
    Pd,
    #[serde(rename = "HS_PD")]
    HsPd,
}

impl FeatureMode {
    pub fn uses_hs(self) -> bool {
        matches!(self, FeatureMode::Hs | FeatureMode::HsPd)
    }

    pub fn uses_pd(self) -> bool {
        matches!(self, FeatureMode::Pd | FeatureMode::HsPd)
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::Hs => "HS",
            FeatureMode::Pd => "PD",
            FeatureMode::HsPd => "HS_PD",
        })
    }
}

impl FromStr for FeatureMode {
    type Err = DeedError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['+', '-'], "_").as_str() {
            "HS" => Ok(FeatureMode::Hs),
            "PD" => Ok(FeatureMode::Pd),
            "HS_PD" => Ok(FeatureMode::HsPd),
            _ => Err(DeedError::Parameter(format!("unknown feature mode {s:?}"))),
        }
    }
}

fn pd_width(pd_k: usize, truncate_k: Option<usize>) -> Result<usize> {
    match truncate_k {
        None => Ok(pd_k),
        Some(0) => Err(DeedError::Parameter("truncate_k must be positive".into())),
        Some(k) if k > pd_k => Err(DeedError::Parameter(format!(
            "truncate_k {k} exceeds pd_k {pd_k}"
        ))),
        Some(k) => Ok(k),
    }
}

/// Row width produced by [`assemble_vectors`] for this header.
pub fn feature_dim(header: &FeatureSetHeader, mode: FeatureMode, truncate_k: Option<usize>) -> Result<usize> {
    let pd = pd_width(header.pd_k, truncate_k)?;
    Ok(match mode {
        FeatureMode::Hs => header.hs_dim,
        FeatureMode::Pd => pd,
        FeatureMode::HsPd => header.hs_dim + pd,
    })
}

/// Builds the f64 design matrix and ±1 labels (+1 edited) in record order.
///
/// `HS_PD` rows are `[hs ; pd]`; `truncate_k` keeps only the first (largest)
/// pd entries without renormalizing them.
pub fn assemble_vectors(
    set: &FeatureSet,
    mode: FeatureMode,
    truncate_k: Option<usize>,
) -> Result<(Array2<f64>, Vec<i8>)> {
    let pd = pd_width(set.header.pd_k, truncate_k)?;
    let d = feature_dim(&set.header, mode, truncate_k)?;
    let mut x = Array2::<f64>::zeros((set.records.len(), d));
    for (mut row, rec) in x.rows_mut().into_iter().zip(&set.records) {
        let hs = rec.hs.iter().filter(|_| mode.uses_hs());
        let pdv = rec.pd[..pd].iter().filter(|_| mode.uses_pd());
        for (dst, &v) in row.iter_mut().zip(hs.chain(pdv)) {
            *dst = v as f64;
        }
    }
    let y = set.records.iter().map(|r| r.label.sign()).collect();
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_store::{FeatureRecord, Label};

    fn set(pd_k: usize) -> FeatureSet {
        let pd: Vec<f32> = (0..pd_k).map(|i| 0.5 / (1u32 << i.min(30)) as f32).collect();
        FeatureSet::new(
            FeatureSetHeader::new("m", "NONE", "d", -1, 4, pd_k),
            vec![
                FeatureRecord { fact_id: 0, label: Label::Edited, hs: vec![1.0, 2.0, 3.0, 4.0], pd: pd.clone() },
                FeatureRecord { fact_id: 1, label: Label::Unedited, hs: vec![-1.0; 4], pd },
            ],
        )
    }

    #[test]
    fn concatenation_width_and_labels() {
        let (x, y) = assemble_vectors(&set(2), FeatureMode::HsPd, None).unwrap();
        assert_eq!(x.dim(), (2, 6));
        assert_eq!(x.row(0).to_vec(), vec![1.0, 2.0, 3.0, 4.0, 0.5, 0.25]);
        assert_eq!(y, vec![1, -1]);
    }

    #[test]
    fn truncation_keeps_head() {
        let s = set(1000);
        let (x, _) = assemble_vectors(&s, FeatureMode::Pd, Some(10)).unwrap();
        assert_eq!(x.ncols(), 10);
        for j in 0..10 {
            assert_eq!(x[[0, j]], s.records[0].pd[j] as f64);
        }
        assert!(matches!(
            assemble_vectors(&s, FeatureMode::Pd, Some(2000)),
            Err(DeedError::Parameter(_))
        ));
    }

    #[test]
    fn hs_pd_is_hs_then_pd() {
        let s = set(3);
        let (both, _) = assemble_vectors(&s, FeatureMode::HsPd, Some(2)).unwrap();
        let (hs, _) = assemble_vectors(&s, FeatureMode::Hs, None).unwrap();
        let (pd, _) = assemble_vectors(&s, FeatureMode::Pd, Some(2)).unwrap();
        for i in 0..2 {
            let mut row = hs.row(i).to_vec();
            row.extend(pd.row(i).iter());
            assert_eq!(both.row(i).to_vec(), row);
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("hs+pd".parse::<FeatureMode>().unwrap(), FeatureMode::HsPd);
        assert_eq!("PD".parse::<FeatureMode>().unwrap(), FeatureMode::Pd);
        assert!("xyz".parse::<FeatureMode>().is_err());
        assert_eq!(FeatureMode::HsPd.to_string(), "HS_PD");
    }
}
