use std::f64::consts::PI;

use crate::error::{DeedError, Result};
use crate::feature_store::{FeatureRecord, FeatureSet, Label};

pub const GRID_POINTS: usize = 512;
/// Grid padding on each side, in bandwidths.
const GRID_PAD: f64 = 3.0;

/// Mean of the ten largest next-token probabilities.
pub fn mean_top10(record: &FeatureRecord) -> Result<f64> {
    if record.pd.len() < 10 {
        return Err(DeedError::Parameter(format!(
            "mean_top10 needs pd_k >= 10, record {} has {}",
            record.fact_id,
            record.pd.len()
        )));
    }
    Ok(record.pd[..10].iter().map(|&p| p as f64).sum::<f64>() / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub n: usize,
}

impl DensityCurve {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

fn sample_std(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Scott's rule: `std · n^(-1/5)` with the n-1 sample standard deviation.
pub fn scott_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(DeedError::Parameter("KDE needs at least two samples".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(DeedError::Parameter("KDE samples must be finite".into()));
    }
    let sd = sample_std(samples);
    if sd.is_nan() || sd <= 0.0 {
        return Err(DeedError::Parameter("KDE samples have zero variance".into()));
    }
    Ok(sd * (samples.len() as f64).powf(-0.2))
}

/// `(1 / (n h)) Σ φ((x - x_i) / h)`.
pub fn gaussian_density_at(samples: &[f64], bandwidth: f64, x: f64) -> f64 {
    let norm = 1.0 / ((2.0 * PI).sqrt() * bandwidth * samples.len() as f64);
    samples
        .iter()
        .map(|&s| {
            let u = (x - s) / bandwidth;
            (-0.5 * u * u).exp()
        })
        .sum::<f64>()
        * norm
}

/// Gaussian KDE with Scott bandwidth on 512 points spanning `[min - 3h, max + 3h]`.
pub fn kde(samples: &[f64]) -> Result<DensityCurve> {
    let h = scott_bandwidth(samples)?;
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - GRID_PAD * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + GRID_PAD * h;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let density = grid.iter().map(|&g| gaussian_density_at(samples, h, g)).collect();
    Ok(DensityCurve { grid, density, bandwidth: h, n: samples.len() })
}

/// KDE of the mean top-10 probability, one curve per class present.
pub fn class_densities(set: &FeatureSet) -> Result<Vec<(Label, DensityCurve)>> {
    let mut curves = Vec::new();
    for label in [Label::Unedited, Label::Edited] {
        let stats = set
            .records
            .iter()
            .filter(|r| r.label == label)
            .map(mean_top10)
            .collect::<Result<Vec<f64>>>()?;
        if !stats.is_empty() {
            curves.push((label, kde(&stats)?));
        }
    }
    Ok(curves)
}
