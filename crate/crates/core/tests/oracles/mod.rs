//! Independent reference implementations used by the integration and
//! acceptance tests. They share no code with the crate beyond its public
//! types, and favour obviousness over speed.
#![allow(dead_code)]

use skewlens::classifier::batch_loss;
use skewlens::{ClassWeights, FeatureVector, ModelParams};

/// Mid-rank of `|d|` among the absolute values of `nonzero`, by counting.
fn mid_rank(nonzero: &[f64], d: f64) -> f64 {
    let a = d.abs();
    let below = nonzero.iter().filter(|x| x.abs() < a).count() as f64;
    let equal = nonzero.iter().filter(|x| x.abs() == a).count() as f64;
    below + (equal + 1.0) / 2.0
}

/// `(W+, two-sided p)` by enumerating all `2^n` sign flips of the observed
/// ranks. Zero differences are dropped first.
pub fn brute_force_wilcoxon(diffs: &[f64]) -> (f64, f64) {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let ranks: Vec<f64> = nonzero.iter().map(|&d| mid_rank(&nonzero, d)).collect();
    let observed: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = nonzero.len();
    if n == 0 {
        return (0.0, 1.0);
    }
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        // half-integer sums are exact in f64
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    let p = (2.0 * (le.min(ge) as f64) / total).min(1.0);
    (observed, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleScores {
    /// `(precision, recall, f1, support)` per class.
    pub per_class: Vec<(f64, f64, f64, f64)>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
}

pub fn brute_force_scores(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> OracleScores {
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut per_class = Vec::new();
    for k in 0..n_classes {
        let mut tp = 0;
        let mut predicted = 0;
        let mut actual = 0;
        for i in 0..y_true.len() {
            if y_pred[i] == k {
                predicted += 1;
            }
            if y_true[i] == k {
                actual += 1;
                if y_pred[i] == k {
                    tp += 1;
                }
            }
        }
        let p = div(tp, predicted);
        let r = div(tp, actual);
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        per_class.push((p, r, f1, actual as f64));
    }
    let n = y_true.len() as f64;
    let macro_f1 = per_class.iter().map(|c| c.2).sum::<f64>() / n_classes as f64;
    let weighted_f1 = per_class.iter().map(|c| c.2 * c.3).sum::<f64>() / n;
    let correct = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    OracleScores {
        per_class,
        macro_f1,
        weighted_f1,
        accuracy: correct as f64 / n,
    }
}

/// Central differences of `batch_loss` for every weight and bias entry.
pub fn finite_difference_gradient(
    params: &ModelParams,
    batch: &[(&FeatureVector, usize)],
    weights: &ClassWeights,
    l2: f64,
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let loss = |p: &ModelParams| batch_loss(p, batch, weights, l2).unwrap();
    let mut grad_w = Vec::with_capacity(params.weights().len());
    for i in 0..params.weights().len() {
        let mut plus = params.clone();
        plus.weights_mut()[i] += h;
        let mut minus = params.clone();
        minus.weights_mut()[i] -= h;
        grad_w.push((loss(&plus) - loss(&minus)) / (2.0 * h));
    }
    let mut grad_b = Vec::with_capacity(params.bias().len());
    for i in 0..params.bias().len() {
        let mut plus = params.clone();
        plus.bias_mut()[i] += h;
        let mut minus = params.clone();
        minus.bias_mut()[i] -= h;
        grad_b.push((loss(&plus) - loss(&minus)) / (2.0 * h));
    }
    (grad_w, grad_b)
}

/// `||a - b|| / max(||a|| + ||b||, 1e-12)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / (na + nb).max(1e-12)
}
