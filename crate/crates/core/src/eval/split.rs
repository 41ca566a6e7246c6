use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{DeedError, Result};
use crate::feature_store::{FeatureSet, Label};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Even; half edited, half unedited.
    pub n_train: usize,
    pub seed: u64,
    /// Downsample the majority class of the test remainder.
    pub balance_test: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { n_train: 126, seed: 0, balance_test: true }
    }
}

/// Seeded permutation of each class's record indices. Training sets take a
/// prefix of each permutation, so smaller training sets are nested in larger
/// ones under the same seed.
#[derive(Debug, Clone)]
pub(crate) struct SplitPlan {
    pub(crate) edited: Vec<usize>,
    pub(crate) unedited: Vec<usize>,
}

impl SplitPlan {
    pub(crate) fn new(set: &FeatureSet, seed: u64) -> Self {
        let mut rng = stream(seed, Stream::Split);
        let mut edited: Vec<usize> = (0..set.len()).filter(|&i| set.records[i].label == Label::Edited).collect();
        let mut unedited: Vec<usize> = (0..set.len()).filter(|&i| set.records[i].label == Label::Unedited).collect();
        edited.shuffle(&mut rng);
        unedited.shuffle(&mut rng);
        SplitPlan { edited, unedited }
    }

    pub(crate) fn check(&self, n_train: usize) -> Result<()> {
        if n_train == 0 || !n_train.is_multiple_of(2) {
            return Err(DeedError::Parameter(format!("n_train must be even and positive, got {n_train}")));
        }
        let half = n_train / 2;
        if half > self.edited.len() || half > self.unedited.len() {
            return Err(DeedError::Parameter(format!(
                "n_train {n_train} needs {half} records per class, have {} edited and {} unedited",
                self.edited.len(),
                self.unedited.len()
            )));
        }
        if half == self.edited.len() || half == self.unedited.len() {
            return Err(DeedError::Parameter("empty test class: training consumes every record of a class".into()));
        }
        Ok(())
    }

    pub(crate) fn train_indices(&self, n_train: usize) -> Vec<usize> {
        let half = n_train / 2;
        let mut idx: Vec<usize> = self.edited[..half].iter().chain(&self.unedited[..half]).copied().collect();
        idx.sort_unstable();
        idx
    }

    pub(crate) fn test_indices(&self, n_train: usize, balance: bool) -> Vec<usize> {
        let half = n_train / 2;
        let (e, u) = (&self.edited[half..], &self.unedited[half..]);
        let m = if balance { e.len().min(u.len()) } else { usize::MAX };
        let mut idx: Vec<usize> = e.iter().take(m).chain(u.iter().take(m)).copied().collect();
        idx.sort_unstable();
        idx
    }
}

pub(crate) fn subset(set: &FeatureSet, indices: &[usize]) -> FeatureSet {
    set.with_records(indices.iter().map(|&i| set.records[i].clone()).collect())
}

/// Balanced training set of `n_train / 2` records per class drawn without
/// replacement; the test set is the remainder, balanced by downsampling when
/// requested. Records keep their original order in both outputs.
pub fn make_split(set: &FeatureSet, spec: &SplitSpec) -> Result<(FeatureSet, FeatureSet)> {
    let plan = SplitPlan::new(set, spec.seed);
    plan.check(spec.n_train)?;
    Ok((
        subset(set, &plan.train_indices(spec.n_train)),
        subset(set, &plan.test_indices(spec.n_train, spec.balance_test)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_store::{FeatureRecord, FeatureSetHeader};

    fn set(edited: usize, unedited: usize) -> FeatureSet {
        let records = (0..edited + unedited)
            .map(|i| FeatureRecord {
                fact_id: i as u32,
                label: if i < edited { Label::Edited } else { Label::Unedited },
                hs: vec![i as f32],
                pd: vec![0.5],
            })
            .collect();
        FeatureSet::new(FeatureSetHeader::new("m", "ROME", "zsre", -1, 1, 1), records)
    }

    #[test]
    fn minimum_edit_count_setting() {
        let (train, test) = make_split(&set(127, 1874), &SplitSpec::default()).unwrap();
        assert_eq!(train.class_counts(), (63, 63));
        assert_eq!(test.class_counts(), (64, 64));
        assert!(train.fact_ids().is_disjoint(&test.fact_ids()));
        assert_eq!(train.header.record_count, 126);
    }

    #[test]
    fn exhausted_class_is_an_error() {
        let err = make_split(&set(63, 2000), &SplitSpec::default()).unwrap_err();
        assert!(err.to_string().contains("empty test class"), "{err}");
        assert!(make_split(&set(50, 2000), &SplitSpec::default()).is_err());
        assert!(make_split(&set(200, 200), &SplitSpec { n_train: 7, ..Default::default() }).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let s = set(300, 400);
        let a = make_split(&s, &SplitSpec { seed: 4, ..Default::default() }).unwrap();
        let b = make_split(&s, &SplitSpec { seed: 4, ..Default::default() }).unwrap();
        let c = make_split(&s, &SplitSpec { seed: 5, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn unbalanced_test_keeps_everything() {
        let (train, test) = make_split(&set(100, 300), &SplitSpec { balance_test: false, ..Default::default() }).unwrap();
        assert_eq!(train.len() + test.len(), 400);
    }
}
