use std::collections::{BTreeMap, HashMap};

use crate::error::{DeedError, Result};
use crate::feature_store::{FactRecord, FeatureSet, Label};

/// Keep each edited record whose retrieved object is shared by some
/// still-unused unedited record, paired with the lowest such fact_id.
/// Edited records are visited in fact_id order, so the pairing is
/// deterministic; every unedited record is used at most once.
pub fn pair_same_object(test: &FeatureSet, manifest: &[FactRecord]) -> Result<FeatureSet> {
    let by_id: HashMap<u32, &FactRecord> = manifest.iter().map(|f| (f.fact_id, f)).collect();
    let object_of = |id: u32| -> Result<String> {
        by_id
            .get(&id)
            .map(|f| f.retrieved_object().to_string())
            .ok_or_else(|| DeedError::Validation(format!("fact_id {id} is missing from the manifest")))
    };

    let mut pool: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut edited = Vec::new();
    for (i, r) in test.records.iter().enumerate() {
        match r.label {
            Label::Unedited => pool.entry(object_of(r.fact_id)?).or_default().push(i),
            Label::Edited => edited.push(i),
        }
    }
    for candidates in pool.values_mut() {
        // Reverse order so `pop` yields the lowest fact_id.
        candidates.sort_unstable_by_key(|&i| std::cmp::Reverse(test.records[i].fact_id));
    }
    edited.sort_unstable_by_key(|&i| test.records[i].fact_id);

    let mut keep = Vec::new();
    for e in edited {
        let object = object_of(test.records[e].fact_id)?;
        if let Some(u) = pool.get_mut(&object).and_then(Vec::pop) {
            keep.push(e);
            keep.push(u);
        } else {
            log::debug!("fact {} has no unedited partner for '{object}'", test.records[e].fact_id);
        }
    }
    if keep.is_empty() {
        return Err(DeedError::EmptyResult("no edited record shares an object with an unedited record".into()));
    }
    keep.sort_unstable();
    Ok(test.with_records(keep.into_iter().map(|i| test.records[i].clone()).collect()))
}
