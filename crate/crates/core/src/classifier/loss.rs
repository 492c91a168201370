use super::{ClassWeights, ModelParams};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

fn check_logits(logits: &[f64], class: usize) -> Result<()> {
    if class >= logits.len() {
        return Err(Error::invalid(format!(
            "class {class} out of range for {} logits",
            logits.len()
        )));
    }
    if let Some(x) = logits.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite logit {x}")));
    }
    Ok(())
}

/// `log(sum_j exp(x_j))` with the maximum factored out.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `-x[class] + log(sum_j exp(x[j]))`.
pub fn cross_entropy(logits: &[f64], class: usize) -> Result<f64> {
    check_logits(logits, class)?;
    Ok(log_sum_exp(logits) - logits[class])
}

/// `weight[class] * cross_entropy(logits, class)`.
pub fn weighted_loss(logits: &[f64], class: usize, weights: &ClassWeights) -> Result<f64> {
    if weights.len() != logits.len() {
        return Err(Error::DimensionMismatch {
            expected: logits.len(),
            actual: weights.len(),
        });
    }
    Ok(weights.get(class) * cross_entropy(logits, class)?)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|x| (x - lse).exp()).collect()
}

/// Mean weighted loss over `batch` plus `l2 * ||W||^2`.
pub fn batch_loss(
    params: &ModelParams,
    batch: &[(&FeatureVector, usize)],
    weights: &ClassWeights,
    l2: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut total = 0.0;
    for (x, class) in batch {
        total += weighted_loss(&params.forward(x)?, *class, weights)?;
    }
    let penalty: f64 = params.weights().iter().map(|w| w * w).sum();
    Ok(total / batch.len() as f64 + l2 * penalty)
}

/// Gradient of [`batch_loss`] with respect to the weight matrix (row-major,
/// `C x D`) and the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// `mean_i w[c_i] (softmax(z_i) - onehot(c_i)) x_i^T + 2 l2 W`, and the
/// matching bias term without the penalty.
pub fn gradient(
    params: &ModelParams,
    batch: &[(&FeatureVector, usize)],
    weights: &ClassWeights,
    l2: f64,
) -> Result<Gradient> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let (c, d) = (params.n_classes(), params.dim());
    if weights.len() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            actual: weights.len(),
        });
    }
    let mut grad_w = vec![0.0; c * d];
    let mut grad_b = vec![0.0; c];
    let scale = 1.0 / batch.len() as f64;
    for (x, class) in batch {
        let logits = params.forward(x)?;
        check_logits(&logits, *class)?;
        let probs = softmax(&logits);
        let w = weights.get(*class) * scale;
        for k in 0..c {
            let delta = w * (probs[k] - if k == *class { 1.0 } else { 0.0 });
            grad_b[k] += delta;
            x.add_scaled_to(delta, &mut grad_w[k * d..(k + 1) * d]);
        }
    }
    if l2 != 0.0 {
        for (g, w) in grad_w.iter_mut().zip(params.weights()) {
            *g += 2.0 * l2 * w;
        }
    }
    Ok(Gradient {
        weights: grad_w,
        bias: grad_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_logits_give_ln2() {
        assert_abs_diff_eq!(
            cross_entropy(&[0.0, 0.0], 0).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn margin_two() {
        // ln(1 + e^-2)
        assert_abs_diff_eq!(
            cross_entropy(&[2.0, 0.0], 0).unwrap(),
            0.126_928_011_042_972_5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let l = cross_entropy(&[1000.0, 0.0], 0).unwrap();
        assert!(l.is_finite() && l.abs() < 1e-300);
        let l = cross_entropy(&[1000.0, 0.0], 1).unwrap();
        assert_abs_diff_eq!(l, 1000.0, epsilon = 1e-9);
    }

    #[test]
    fn weight_four_scales() {
        let w = ClassWeights::new(vec![4.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            weighted_loss(&[0.0, 0.0], 0, &w).unwrap(),
            4.0 * std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(cross_entropy(&[0.0, f64::NAN], 0).is_err());
        assert!(cross_entropy(&[0.0, f64::INFINITY], 0).is_err());
        assert!(cross_entropy(&[0.0, 0.0], 2).is_err());
        let w = ClassWeights::uniform(3);
        assert!(weighted_loss(&[0.0, 0.0], 0, &w).is_err());
    }

    #[test]
    fn uniform_logits_gradient() {
        let params = ModelParams::zeros(2, 1).unwrap();
        let x = FeatureVector::dense(vec![1.0]).unwrap();
        let g = gradient(&params, &[(&x, 0)], &ClassWeights::uniform(2), 0.0).unwrap();
        assert_eq!(g.bias, vec![-0.5, 0.5]);
        assert_eq!(g.weights, vec![-0.5, 0.5]);
    }

    #[test]
    fn class_weight_scales_gradient_exactly() {
        let mut params = ModelParams::zeros(2, 3).unwrap();
        params.weights_mut().copy_from_slice(&[0.3, -0.2, 0.1, 0.05, 0.4, -0.7]);
        let x = FeatureVector::dense(vec![1.0, 2.0, -1.0]).unwrap();
        let g1 = gradient(&params, &[(&x, 1)], &ClassWeights::new(vec![1.0, 1.0]).unwrap(), 0.0).unwrap();
        let g4 = gradient(&params, &[(&x, 1)], &ClassWeights::new(vec![1.0, 4.0]).unwrap(), 0.0).unwrap();
        for (a, b) in g1.weights.iter().zip(&g4.weights) {
            assert_eq!(4.0 * a, *b);
        }
        for (a, b) in g1.bias.iter().zip(&g4.bias) {
            assert_eq!(4.0 * a, *b);
        }
    }
}
