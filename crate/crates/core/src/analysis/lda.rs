use nalgebra::{DMatrix, DVector};

use crate::error::{DeedError, Result};
use crate::feature_store::{FeatureSet, Label};

/// One-dimensional Fisher projection of the hidden states of a feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaProjection {
    /// Unit vector; oriented so the edited class projects to the right.
    pub direction: Vec<f64>,
    pub fact_ids: Vec<u32>,
    pub labels: Vec<Label>,
    /// `direction · hs` per record, in record order.
    pub projected: Vec<f64>,
    /// Projected means (unedited, edited).
    pub class_means: (f64, f64),
    pub pooled_std: f64,
    /// `|m1 - m0| / pooled_std`.
    pub separation: f64,
}

fn mean_of(rows: &[&[f32]], dim: usize) -> DVector<f64> {
    let mut m = DVector::zeros(dim);
    for row in rows {
        for (acc, &v) in m.iter_mut().zip(row.iter()) {
            *acc += v as f64;
        }
    }
    m / rows.len() as f64
}

/// Fits the direction `(S_W + λI)⁻¹ (μ₁ - μ₀)` on the given set and projects
/// the same set onto it. The ridge is `1e-6 · trace(S_W) / dim`, or `1e-6`
/// when the scatter is zero. If the class means coincide exactly the first
/// axis is used.
pub fn lda_project(set: &FeatureSet) -> Result<LdaProjection> {
    let dim = set.header.hs_dim;
    let (unedited, edited): (Vec<_>, Vec<_>) = set.records.iter().partition(|r| r.label == Label::Unedited);
    if unedited.len() < 2 || edited.len() < 2 {
        return Err(DeedError::Parameter("LDA needs at least two records of each class".into()));
    }
    let hs0: Vec<&[f32]> = unedited.iter().map(|r| r.hs.as_slice()).collect();
    let hs1: Vec<&[f32]> = edited.iter().map(|r| r.hs.as_slice()).collect();
    let mu0 = mean_of(&hs0, dim);
    let mu1 = mean_of(&hs1, dim);

    let mut scatter = DMatrix::<f64>::zeros(dim, dim);
    for (rows, mu) in [(&hs0, &mu0), (&hs1, &mu1)] {
        for row in rows.iter() {
            let centred = DVector::from_iterator(dim, row.iter().zip(mu.iter()).map(|(&v, m)| v as f64 - m));
            scatter.ger(1.0, &centred, &centred, 1.0);
        }
    }
    let trace = scatter.trace();
    let ridge = if trace > 0.0 { 1e-6 * trace / dim as f64 } else { 1e-6 };
    for i in 0..dim {
        scatter[(i, i)] += ridge;
    }
    let diff = &mu1 - &mu0;
    let chol = scatter
        .cholesky()
        .ok_or_else(|| DeedError::Parameter("regularized scatter is not positive definite".into()))?;
    let mut direction = chol.solve(&diff);
    let norm = direction.norm();
    if norm > 0.0 && norm.is_finite() {
        direction /= norm;
    } else {
        direction = DVector::zeros(dim);
        direction[0] = 1.0;
    }

    let project = |hs: &[f32]| hs.iter().zip(direction.iter()).map(|(&v, d)| v as f64 * d).sum::<f64>();
    let mut projected: Vec<f64> = set.records.iter().map(|r| project(&r.hs)).collect();
    let class_stats = |label: Label, z: &[f64]| {
        let vals: Vec<f64> = set.records.iter().zip(z).filter(|(r, _)| r.label == label).map(|(_, &v)| v).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let ss = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        (mean, ss, vals.len())
    };
    let (mut m0, ss0, n0) = class_stats(Label::Unedited, &projected);
    let (mut m1, ss1, n1) = class_stats(Label::Edited, &projected);
    if m1 < m0 {
        direction.neg_mut();
        projected.iter_mut().for_each(|z| *z = -*z);
        m0 = -m0;
        m1 = -m1;
    }
    let pooled_std = ((ss0 + ss1) / (n0 + n1 - 2) as f64).sqrt();
    let gap = m1 - m0;
    let separation = if pooled_std > 0.0 {
        gap / pooled_std
    } else if gap == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };

    Ok(LdaProjection {
        direction: direction.iter().copied().collect(),
        fact_ids: set.records.iter().map(|r| r.fact_id).collect(),
        labels: set.records.iter().map(|r| r.label).collect(),
        projected,
        class_means: (m0, m1),
        pooled_std,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_store::{FeatureRecord, FeatureSetHeader};
    use crate::synthetic::{generate, EditEffectProfile};

    #[test]
    fn identical_classes_do_not_separate() {
        let base = generate(&EditEffectProfile::none(4), 200, 6, 3).unwrap();
        let unedited: Vec<_> = base.records.iter().filter(|r| r.label == Label::Unedited).cloned().collect();
        let mut records = unedited.clone();
        records.extend(unedited.iter().map(|r| FeatureRecord { fact_id: r.fact_id + 10_000, label: Label::Edited, ..r.clone() }));
        let set = FeatureSet::new(base.header.clone(), records);
        let proj = lda_project(&set).unwrap();
        assert!(proj.separation < 0.1, "{}", proj.separation);
        let norm: f64 = proj.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn orientation_puts_edited_right() {
        let set = generate(&EditEffectProfile::le_like(2), 100, 8, 3).unwrap();
        let proj = lda_project(&set).unwrap();
        assert!(proj.class_means.1 >= proj.class_means.0);
        assert!(proj.separation >= 2.0);
        assert_eq!(proj.projected.len(), set.len());
    }

    #[test]
    fn single_class_rejected() {
        let header = FeatureSetHeader::new("m", "NONE", "d", -1, 1, 1);
        let rec = |id| FeatureRecord { fact_id: id, label: Label::Edited, hs: vec![id as f32], pd: vec![0.5] };
        let set = FeatureSet::new(header, vec![rec(0), rec(1), rec(2)]);
        assert!(matches!(lda_project(&set), Err(DeedError::Parameter(_))));
    }
}
