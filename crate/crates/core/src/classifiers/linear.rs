use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::stump::check_design;
use crate::error::{DeedError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearL1Config {
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once an accepted step lowers the objective by less than this.
    pub tol: f64,
}

impl Default for LinearL1Config {
    fn default() -> Self {
        LinearL1Config { lambda: 0.01, max_iter: 1000, tol: 1e-6 }
    }
}

/// L1-regularized logistic regression on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearL1Model {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    /// Training means per feature.
    pub means: Vec<f64>,
    /// Training standard deviations; 0 marks a constant (dropped) feature.
    pub stds: Vec<f64>,
    /// Objective value at the start and after every accepted step.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl LinearL1Model {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_one(&self, row: ArrayView1<f64>) -> f64 {
        let mut z = self.bias;
        for j in 0..self.weights.len() {
            if self.stds[j] > 0.0 {
                z += self.weights[j] * (row[j] - self.means[j]) / self.stds[j];
            }
        }
        z
    }

    /// `sign(w·x̃ + b)`, zero mapped to -1.
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<i8> {
        x.rows()
            .into_iter()
            .map(|r| if self.decision_one(r) > 0.0 { 1 } else { -1 })
            .collect()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let d = self.weights.len();
        if self.means.len() != d || self.stds.len() != d {
            return Err(DeedError::Format("standardization length mismatch".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.weights) && finite(&self.means) && finite(&self.stds) && self.bias.is_finite()) {
            return Err(DeedError::Format("non-finite linear model parameter".into()));
        }
        if self.stds.iter().zip(&self.weights).any(|(&s, &w)| s < 0.0 || (s == 0.0 && w != 0.0)) {
            return Err(DeedError::Format("dropped feature carries a weight".into()));
        }
        Ok(())
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

fn log1p_exp_neg(m: f64) -> f64 {
    // log(1 + exp(-m)) without overflow
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

fn sigmoid_neg(m: f64) -> f64 {
    // σ(-m) = 1 / (1 + e^m)
    if m > 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

/// `(1/n) Σ log(1 + exp(-y_i (w·x_i + b))) + λ‖w‖₁` on already standardized rows.
pub fn logistic_l1_objective(x: ArrayView2<f64>, y: &[i8], weights: ArrayView1<f64>, bias: f64, lambda: f64) -> f64 {
    let margins = x.dot(&weights);
    let loss: f64 = margins
        .iter()
        .zip(y)
        .map(|(&z, &yi)| log1p_exp_neg(yi as f64 * (z + bias)))
        .sum();
    loss / y.len() as f64 + lambda * weights.iter().map(|w| w.abs()).sum::<f64>()
}

/// One proximal-gradient step: gradient step on the smooth loss, then
/// soft-thresholding of the weights (the bias is not penalized).
pub fn proximal_step(weights: ArrayView1<f64>, bias: f64, grad_w: ArrayView1<f64>, grad_b: f64, step: f64, lambda: f64) -> (Array1<f64>, f64) {
    let w = weights
        .iter()
        .zip(grad_w)
        .map(|(&wj, &gj)| soft_threshold(wj - step * gj, step * lambda))
        .collect();
    (w, bias - step * grad_b)
}

fn standardize(x: ArrayView2<f64>) -> (Array2<f64>, Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let means = x.mean_axis(Axis(0)).expect("non-empty");
    let mut stds = Vec::with_capacity(x.ncols());
    let mut xs = Array2::zeros(x.dim());
    for (j, col) in x.columns().into_iter().enumerate() {
        let var = col.iter().map(|v| (v - means[j]).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let sd = if sd > 1e-12 * (1.0 + means[j].abs()) { sd } else { 0.0 };
        if sd > 0.0 {
            for (dst, v) in xs.column_mut(j).iter_mut().zip(col) {
                *dst = (v - means[j]) / sd;
            }
        }
        stds.push(sd);
    }
    (xs, means.to_vec(), stds)
}

/// Fits by proximal gradient (ISTA) from `w = 0, b = 0` with the fixed step
/// `n / (0.25‖X̃‖²_F + n)`. A step that would raise the objective is rejected
/// and ends the fit, so the recorded objective trace never increases.
pub fn fit_linear_l1(x: ArrayView2<f64>, y: &[i8], config: &LinearL1Config) -> Result<LinearL1Model> {
    check_design(x, y)?;
    if !y.contains(&1) || !y.contains(&-1) {
        return Err(DeedError::Parameter("logistic regression needs both classes".into()));
    }
    if !(config.lambda.is_finite() && config.lambda >= 0.0) {
        return Err(DeedError::Parameter("lambda must be finite and non-negative".into()));
    }

    let (xs, means, stds) = standardize(x);
    let n = xs.nrows() as f64;
    let frob: f64 = xs.iter().map(|v| v * v).sum();
    let step = n / (0.25 * frob + n);
    let yf: Array1<f64> = y.iter().map(|&v| v as f64).collect();

    let mut w = Array1::<f64>::zeros(xs.ncols());
    let mut b = 0.0;
    let mut obj = logistic_l1_objective(xs.view(), y, w.view(), b, config.lambda);
    let mut trace = vec![obj];

    for _ in 0..config.max_iter {
        let margins = (xs.dot(&w) + b) * &yf;
        // d loss / d z_i = -y_i σ(-m_i) / n
        let coef: Array1<f64> = margins.iter().zip(&yf).map(|(&m, &yi)| -yi * sigmoid_neg(m) / n).collect();
        let grad_w = xs.t().dot(&coef);
        let grad_b = coef.sum();
        let (w_new, b_new) = proximal_step(w.view(), b, grad_w.view(), grad_b, step, config.lambda);
        let obj_new = logistic_l1_objective(xs.view(), y, w_new.view(), b_new, config.lambda);
        if obj_new.is_nan() || obj_new > obj {
            break;
        }
        let decrease = obj - obj_new;
        w = w_new;
        b = b_new;
        obj = obj_new;
        trace.push(obj);
        if decrease < config.tol {
            break;
        }
    }

    let weights = w.iter().zip(&stds).map(|(&wj, &s)| if s > 0.0 { wj } else { 0.0 }).collect();
    Ok(LinearL1Model { weights, bias: b, lambda: config.lambda, means, stds, objective_trace: trace })
}
