use rayon::prelude::*;

use super::harness::{run_eval, EvalConfig, EvalReport, ExperimentKind};
use super::split::{subset, SplitPlan};
use crate::error::{DeedError, Result};
use crate::feature_store::FeatureSet;

pub const DEFAULT_SWEEP_SIZES: [usize; 7] = [10, 50, 100, 150, 200, 250, 300];

fn canonical_sizes(sizes: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = sizes.to_vec();
    out.sort_unstable();
    let before = out.len();
    out.dedup();
    if out.len() != before {
        log::warn!("dropped {} duplicate training size(s)", before - out.len());
    }
    out
}

/// One report per (size, seed), ordered by size then by seed position.
///
/// Each seed carves its test pool once using the largest size, and every
/// smaller training set is a prefix of the same per-class permutation, so
/// all sizes under a seed share one test set. Cells run on the current rayon
/// pool; the output order does not depend on scheduling.
pub fn sweep_training_size(
    set: &FeatureSet,
    sizes: &[usize],
    seeds: &[u64],
    config: &EvalConfig,
    balance_test: bool,
) -> Result<Vec<EvalReport>> {
    let sizes = canonical_sizes(sizes);
    let Some(&max) = sizes.last() else {
        return Err(DeedError::Parameter("no training sizes given".into()));
    };
    if seeds.is_empty() {
        return Err(DeedError::Parameter("no seeds given".into()));
    }
    let mut pools = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let plan = SplitPlan::new(set, seed);
        for &n in &sizes {
            plan.check(n)?;
        }
        let test = subset(set, &plan.test_indices(max, balance_test));
        pools.push((plan, test));
    }
    let cells: Vec<(usize, usize)> = (0..sizes.len()).flat_map(|s| (0..seeds.len()).map(move |k| (s, k))).collect();
    cells
        .par_iter()
        .map(|&(s, k)| {
            let (plan, test) = &pools[k];
            let train = subset(set, &plan.train_indices(sizes[s]));
            let cell = EvalConfig {
                kind: Some(config.kind.unwrap_or(ExperimentKind::SweepPoint)),
                seed: Some(seeds[k]),
                ..*config
            };
            run_eval(&train, test, &cell)
        })
        .collect()
}
