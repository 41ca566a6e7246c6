//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use deed_core::{FeatureRecord, FeatureSet, FeatureSetHeader, Label};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A small dataset on an integer grid with weights that are multiples of
/// 1/1024, so every weighted error sum is exact in f64.
pub struct GridData {
    pub x: Array2<f64>,
    pub y: Vec<i8>,
    pub w: Vec<f64>,
}

pub fn grid_data(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize, grid: i32) -> GridData {
    let n = rng.random_range(1..=max_n);
    let d = rng.random_range(1..=max_d);
    let x = Array2::from_shape_fn((n, d), |_| f64::from(rng.random_range(0..grid)));
    let y: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    // Split 1024 units into n positive parts.
    let mut cuts: Vec<u32> = (0..n - 1).map(|_| rng.random_range(0..=1024 - n as u32)).collect();
    cuts.sort_unstable();
    let mut w = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.iter().chain(std::iter::once(&(1024 - n as u32))) {
        w.push(f64::from(c - prev + 1) / 1024.0);
        prev = *c;
    }
    GridData { x, y, w }
}

/// Exhaustive stump search written independently of the library: every
/// (feature, threshold, polarity) is scored directly, and the winner is the
/// lexicographic minimum of (error, feature, threshold, polarity +1 first).
pub struct OracleStump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
    pub error: f64,
}

pub fn stump_oracle(x: &Array2<f64>, y: &[i8], w: &[f64]) -> OracleStump {
    let mut best: Option<(f64, usize, f64, u8, i8)> = None;
    for j in 0..x.ncols() {
        let mut values: Vec<f64> = x.column(j).to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut thresholds = vec![f64::MIN];
        thresholds.extend(values.windows(2).map(|p| 0.5 * (p[0] + p[1])));
        for &t in &thresholds {
            for (rank, pol) in [(0u8, 1i8), (1, -1)] {
                let err: f64 = (0..x.nrows())
                    .filter(|&i| {
                        let pred = if x[[i, j]] > t { pol } else { -pol };
                        pred != y[i]
                    })
                    .map(|i| w[i])
                    .sum();
                let cand = (err, j, t, rank, pol);
                let better = match best {
                    None => true,
                    Some(b) => (cand.0, cand.1, cand.2, cand.3)
                        .partial_cmp(&(b.0, b.1, b.2, b.3))
                        .unwrap()
                        .is_lt(),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    let (error, feature, threshold, _, polarity) = best.unwrap();
    OracleStump { feature, threshold, polarity, error }
}

/// Random valid feature set with arbitrary finite hidden-state values.
pub fn random_feature_set(rng: &mut ChaCha8Rng, max_records: usize) -> FeatureSet {
    let hs_dim = rng.random_range(1..=8);
    let pd_k = rng.random_range(1..=8);
    let n = rng.random_range(0..=max_records);
    let records = (0..n)
        .map(|i| {
            let hs = (0..hs_dim)
                .map(|_| match rng.random_range(0..6) {
                    0 => 0.0f32,
                    1 => -0.0,
                    2 => f32::from_bits(rng.random_range(1..0x0080_0000)),
                    3 => f32::MAX * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                    _ => f32::from_bits(rng.random::<u32>() & 0xBF7F_FFFF),
                })
                .collect();
            let mut pd: Vec<f32> = (0..pd_k).map(|_| rng.random::<f32>()).collect();
            let total: f32 = pd.iter().sum::<f32>() * 1.01 + 1e-3;
            pd.iter_mut().for_each(|p| *p /= total);
            pd.sort_by(|a, b| b.total_cmp(a));
            FeatureRecord {
                fact_id: (i as u32) * 7 + rng.random_range(0..7),
                label: if rng.random_bool(0.5) { Label::Edited } else { Label::Unedited },
                hs,
                pd,
            }
        })
        .collect();
    let header = FeatureSetHeader::new(
        format!("model-{}", rng.random_range(0..100)),
        "ROME",
        "zsre",
        rng.random_range(-1..48),
        hs_dim,
        pd_k,
    );
    FeatureSet::new(header, records)
}

pub fn bits_equal(a: &FeatureSet, b: &FeatureSet) -> bool {
    a.header == b.header
        && a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(r, s)| {
            r.fact_id == s.fact_id
                && r.label == s.label
                && r.hs.iter().map(|v| v.to_bits()).eq(s.hs.iter().map(|v| v.to_bits()))
                && r.pd.iter().map(|v| v.to_bits()).eq(s.pd.iter().map(|v| v.to_bits()))
        })
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
