//! Synthetic feature sets with planted edit effects.
//!
//! Hidden states are isotropic Gaussians around the origin; edited facts are
//! shifted by `hs_separation · hs_noise` along a seed-determined unit vector.
//! The top-1 probability is logit-normal around a per-class peak and the
//! remaining mass is spread over the other `k - 1` slots with a randomized
//! geometric profile (ratio 0.7), then the vector is sorted.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DeedError, Result};
use crate::feature_store::{FactRecord, FeatureRecord, FeatureSet, FeatureSetHeader, Label};
use crate::rng::{stream, Stream};

const RESIDUAL_DECAY: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditEffectProfile {
    pub name: String,
    /// Mean shift of edited hidden states, in units of `hs_noise`.
    pub hs_separation: f64,
    pub hs_noise: f64,
    /// Median top-1 probability of unedited facts.
    pub pd_unedited_peak: f64,
    pub pd_edited_peak: f64,
    /// Standard deviation of the top-1 probability on the logit scale.
    pub pd_peak_spread: f64,
    pub seed: u64,
}

impl EditEffectProfile {
    /// Strong hidden-state shift and a large probability jump (locate-and-edit style).
    pub fn le_like(seed: u64) -> Self {
        EditEffectProfile {
            name: "le-like".into(),
            hs_separation: 3.0,
            hs_noise: 1.0,
            pd_unedited_peak: 0.3,
            pd_edited_peak: 0.8,
            pd_peak_spread: 0.3,
            seed,
        }
    }

    /// Weak shift and a small probability jump (meta-learning style).
    pub fn ml_like(seed: u64) -> Self {
        EditEffectProfile {
            name: "ml-like".into(),
            hs_separation: 0.5,
            pd_edited_peak: 0.4,
            ..Self::le_like(seed)
        }
    }

    /// No edit effect: both classes share one generating law.
    pub fn none(seed: u64) -> Self {
        EditEffectProfile {
            name: "none".into(),
            hs_separation: 0.0,
            pd_edited_peak: 0.3,
            ..Self::le_like(seed)
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "le-like" | "le" => Ok(Self::le_like(seed)),
            "ml-like" | "ml" => Ok(Self::ml_like(seed)),
            "none" => Ok(Self::none(seed)),
            other => Err(DeedError::Parameter(format!("unknown preset {other:?}"))),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let profile: EditEffectProfile = serde_json::from_str(&text)
            .map_err(|e| DeedError::Format(format!("profile: {e}")))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |p: f64| p > 0.0 && p < 1.0;
        if !(self.hs_separation.is_finite() && self.hs_separation >= 0.0) {
            return Err(DeedError::Parameter("hs_separation must be finite and non-negative".into()));
        }
        if !(self.hs_noise.is_finite() && self.hs_noise > 0.0) {
            return Err(DeedError::Parameter("hs_noise must be positive".into()));
        }
        if !open_unit(self.pd_unedited_peak) || !open_unit(self.pd_edited_peak) {
            return Err(DeedError::Parameter("pd peaks must lie in (0, 1)".into()));
        }
        if !(self.pd_peak_spread.is_finite() && self.pd_peak_spread > 0.0) {
            return Err(DeedError::Parameter("pd_peak_spread must be positive".into()));
        }
        Ok(())
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn sorted_f32_desc(mut values: Vec<f64>) -> Vec<f32> {
    values.sort_by(|a, b| b.total_cmp(a));
    values.into_iter().map(|v| v as f32).collect()
}

fn draw_pd(rng: &mut ChaCha8Rng, peak: f64, spread: f64, k: usize) -> Vec<f32> {
    let z: f64 = rng.sample(StandardNormal);
    let top = sigmoid(logit(peak) + spread * z);
    let mut values = Vec::with_capacity(k);
    values.push(top);
    if k > 1 {
        let mut decay = 1.0;
        let mut profile = Vec::with_capacity(k - 1);
        for _ in 1..k {
            profile.push(decay * rng.random_range(0.5..1.5));
            decay *= RESIDUAL_DECAY;
        }
        let total: f64 = profile.iter().sum();
        values.extend(profile.into_iter().map(|r| r * (1.0 - top) / total));
    }
    sorted_f32_desc(values)
}

/// Generates `2 · n_per_class` records: unedited facts get ids `0..n`,
/// edited facts `n..2n`. Deterministic in all arguments.
pub fn generate(
    profile: &EditEffectProfile,
    n_per_class: usize,
    hs_dim: usize,
    pd_k: usize,
) -> Result<FeatureSet> {
    profile.validate()?;
    if n_per_class == 0 || hs_dim == 0 || pd_k == 0 {
        return Err(DeedError::Parameter("n_per_class, hs_dim and pd_k must be positive".into()));
    }
    let direction = random_unit_vector(&mut stream(profile.seed, Stream::Direction), hs_dim);
    let shift = profile.hs_separation * profile.hs_noise;
    let mut rng = stream(profile.seed, Stream::Generate);

    let mut records = Vec::with_capacity(2 * n_per_class);
    for i in 0..2 * n_per_class {
        let label = if i < n_per_class { Label::Unedited } else { Label::Edited };
        let offset = if label == Label::Edited { shift } else { 0.0 };
        let hs = direction
            .iter()
            .map(|&u| {
                let z: f64 = rng.sample(StandardNormal);
                (offset * u + profile.hs_noise * z) as f32
            })
            .collect();
        let peak = match label {
            Label::Edited => profile.pd_edited_peak,
            Label::Unedited => profile.pd_unedited_peak,
        };
        let pd = draw_pd(&mut rng, peak, profile.pd_peak_spread, pd_k);
        records.push(FeatureRecord { fact_id: i as u32, label, hs, pd });
    }

    let header = FeatureSetHeader::new(
        "synthetic",
        format!("SYNTH-{}", profile.name.to_ascii_uppercase()),
        "synthetic",
        -1,
        hs_dim,
        pd_k,
    );
    Ok(FeatureSet::new(header, records))
}

/// Simulates features of the same facts read from a fine-tuned sibling model:
/// hidden states are rotated by `angle` in a seed-determined plane and get
/// additive Gaussian noise; pd values get multiplicative log-normal noise and
/// are clipped, renormalized if needed and re-sorted. Labels and fact ids are
/// kept. With `hs_dim == 1` there is no plane and the rotation is skipped.
pub fn generate_domain_shifted(base: &FeatureSet, rotation_angle: f64, noise: f64, seed: u64) -> Result<FeatureSet> {
    if base.is_empty() {
        return Err(DeedError::Parameter("cannot shift an empty feature set".into()));
    }
    if !(rotation_angle.is_finite() && noise.is_finite() && noise >= 0.0) {
        return Err(DeedError::Parameter("angle must be finite and noise non-negative".into()));
    }
    let dim = base.header.hs_dim;
    let mut rng = stream(seed, Stream::Shift);
    let plane = if dim >= 2 && rotation_angle != 0.0 {
        let a = random_unit_vector(&mut rng, dim);
        let mut b = random_unit_vector(&mut rng, dim);
        let proj: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        b.iter_mut().zip(&a).for_each(|(bi, ai)| *bi -= proj * ai);
        let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        b.iter_mut().for_each(|x| *x /= norm);
        Some((a, b))
    } else {
        None
    };
    let (cos, sin) = (rotation_angle.cos(), rotation_angle.sin());

    let records = base
        .records
        .iter()
        .map(|rec| {
            let mut hs: Vec<f64> = rec.hs.iter().map(|&v| v as f64).collect();
            if let Some((a, b)) = &plane {
                let pa: f64 = a.iter().zip(&hs).map(|(u, x)| u * x).sum();
                let pb: f64 = b.iter().zip(&hs).map(|(u, x)| u * x).sum();
                for ((x, ai), bi) in hs.iter_mut().zip(a).zip(b) {
                    *x += (cos - 1.0) * (pa * ai + pb * bi) + sin * (pa * bi - pb * ai);
                }
            }
            if noise > 0.0 {
                for x in hs.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *x += noise * z;
                }
            }
            let mut pd: Vec<f64> = rec.pd.iter().map(|&p| p as f64).collect();
            if noise > 0.0 {
                for p in pd.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *p = (*p * (noise * z).exp()).clamp(0.0, 1.0);
                }
                let sum: f64 = pd.iter().sum();
                if sum > 1.0 {
                    pd.iter_mut().for_each(|p| *p /= sum);
                }
            }
            FeatureRecord {
                fact_id: rec.fact_id,
                label: rec.label,
                hs: hs.into_iter().map(|v| v as f32).collect(),
                pd: sorted_f32_desc(pd),
            }
        })
        .collect();

    let mut header = base.header.clone();
    header.model_id = format!("{}-shifted", header.model_id);
    Ok(FeatureSet::new(header, records))
}

/// Fabricates a fact manifest for a synthetic set. Retrieved objects are drawn
/// from a pool of `n_objects` names so that same-object pairs exist.
pub fn synthetic_manifest(set: &FeatureSet, n_objects: usize, seed: u64) -> Result<Vec<FactRecord>> {
    if n_objects == 0 {
        return Err(DeedError::Parameter("n_objects must be positive".into()));
    }
    let mut rng = stream(seed, Stream::Manifest);
    let facts = set
        .records
        .iter()
        .map(|rec| {
            let id = rec.fact_id;
            let original = format!("object-{}", rng.random_range(0..n_objects));
            let new_object = match rec.label {
                Label::Edited => format!("object-{}", rng.random_range(0..n_objects)),
                Label::Unedited => String::new(),
            };
            FactRecord {
                fact_id: id,
                subject: format!("subject-{id}"),
                relation: format!("relation-{}", id % 7),
                original_object: original,
                new_object,
                edit_prompt: format!("subject-{id} relation-{} is", id % 7),
                paraphrase_prompt: format!("Regarding subject-{id}, relation-{} is", id % 7),
                label: rec.label,
            }
        })
        .collect();
    Ok(facts)
}
