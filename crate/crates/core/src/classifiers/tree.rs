use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::stump::{check_design, check_weights, ColumnOrder};
use crate::error::{DeedError, Result};

pub const MAX_TREE_DEPTH: usize = 3;

/// Binary classification tree; rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TreeNode {
    Leaf {
        class: i8,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict_one(&self, row: ArrayView1<f64>) -> i8 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class } => return *class,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<i8> {
        x.rows().into_iter().map(|r| self.predict_one(r)).collect()
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Largest feature index referenced by any split.
    pub(crate) fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature, left, right, .. } => {
                Some((*feature).max(left.max_feature().unwrap_or(0)).max(right.max_feature().unwrap_or(0)))
            }
        }
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        match self {
            TreeNode::Leaf { class } => *class == 1 || *class == -1,
            TreeNode::Split { threshold, left, right, .. } => {
                !threshold.is_nan() && left.is_well_formed() && right.is_well_formed()
            }
        }
    }
}

/// Weighted Gini impurity times node weight: `W - (W+² + W-²) / W`.
fn scaled_gini(pos: f64, neg: f64) -> f64 {
    let total = pos + neg;
    if total <= 0.0 {
        0.0
    } else {
        total - (pos * pos + neg * neg) / total
    }
}

fn majority(pos: f64, neg: f64) -> i8 {
    if pos > neg {
        1
    } else {
        -1
    }
}

/// Greedy CART with weighted Gini impurity.
///
/// Splitting stops at `max_depth`, at a pure node, or when no split exists
/// (every feature constant on the node). A split whose impurity decrease is
/// exactly zero is still taken, which is what lets depth 2 solve XOR.
pub fn fit_tree(x: ArrayView2<f64>, y: &[i8], w: &[f64], max_depth: usize) -> Result<TreeNode> {
    check_design(x, y)?;
    check_weights(w, x.nrows())?;
    if !(1..=MAX_TREE_DEPTH).contains(&max_depth) {
        return Err(DeedError::Parameter(format!("max_depth must be in 1..={MAX_TREE_DEPTH}")));
    }
    Ok(fit_tree_sorted(x, y, w, &ColumnOrder::new(x), max_depth))
}

pub(crate) fn fit_tree_sorted(x: ArrayView2<f64>, y: &[i8], w: &[f64], order: &ColumnOrder, max_depth: usize) -> TreeNode {
    let members = vec![true; x.nrows()];
    grow(x, y, w, order, &members, max_depth)
}

fn grow(x: ArrayView2<f64>, y: &[i8], w: &[f64], order: &ColumnOrder, members: &[bool], depth_left: usize) -> TreeNode {
    let (mut pos, mut neg) = (0.0, 0.0);
    for i in (0..y.len()).filter(|&i| members[i]) {
        if y[i] > 0 {
            pos += w[i];
        } else {
            neg += w[i];
        }
    }
    let leaf = TreeNode::Leaf { class: majority(pos, neg) };
    if depth_left == 0 || pos == 0.0 || neg == 0.0 {
        return leaf;
    }
    let parent = scaled_gini(pos, neg);

    let mut best: Option<(usize, f64, f64)> = None;
    for (feature, idx) in order.columns.iter().enumerate() {
        let col = x.column(feature);
        let rows: Vec<usize> = idx.iter().copied().filter(|&i| members[i]).collect();
        let (mut pos_left, mut neg_left) = (0.0, 0.0);
        for k in 0..rows.len().saturating_sub(1) {
            let i = rows[k];
            if y[i] > 0 {
                pos_left += w[i];
            } else {
                neg_left += w[i];
            }
            let (lo, hi) = (col[i], col[rows[k + 1]]);
            if hi > lo {
                let impurity = scaled_gini(pos_left, neg_left) + scaled_gini(pos - pos_left, neg - neg_left);
                if best.is_none_or(|(_, _, b)| impurity < b) {
                    best = Some((feature, 0.5 * (lo + hi), impurity));
                }
            }
        }
    }

    match best {
        Some((feature, threshold, impurity)) if impurity <= parent + 1e-12 * (pos + neg) => {
            let col = x.column(feature);
            let left_members: Vec<bool> = (0..members.len()).map(|i| members[i] && col[i] <= threshold).collect();
            let right_members: Vec<bool> = (0..members.len()).map(|i| members[i] && col[i] > threshold).collect();
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(x, y, w, order, &left_members, depth_left - 1)),
                right: Box::new(grow(x, y, w, order, &right_members, depth_left - 1)),
            }
        }
        _ => leaf,
    }
}
