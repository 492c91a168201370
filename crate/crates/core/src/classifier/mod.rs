//! Class-weighted linear softmax classifier.
//!
//! The head maps a feature vector `x` to logits `W x + b`. Training minimises
//! the class-weighted cross-entropy `weight[class] * (-x[class] + log sum_j exp x[j])`
//! averaged over minibatches, by plain minibatch gradient descent from zero
//! initialisation.

mod loss;
mod train;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub use loss::{batch_loss, cross_entropy, gradient, softmax, weighted_loss, Gradient};
pub use train::{run_repeated, run_repeated_multi, train, train_on_features, RepeatedReport, RepeatedRun};

/// Per-class multipliers of the cross-entropy loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights(Vec<f64>);

impl ClassWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("class weights must not be empty"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("class weight {w} must be positive and finite")));
        }
        Ok(ClassWeights(weights))
    }

    pub fn uniform(n_classes: usize) -> Self {
        ClassWeights(vec![1.0; n_classes])
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub class_weights: ClassWeights,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            class_weights: ClassWeights::uniform(2),
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::invalid(format!("l2 penalty {} must be non-negative", self.l2)));
        }
        Ok(())
    }
}

/// `C x D` weight matrix (row-major) and length-`C` bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n_classes: usize,
    dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

const MODEL_MAGIC: &str = "skewlens-model v1";

impl ModelParams {
    pub fn zeros(n_classes: usize, dim: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::invalid(format!(
                "a classifier needs at least 2 classes, got {n_classes}"
            )));
        }
        Ok(ModelParams {
            n_classes,
            dim,
            weights: vec![0.0; n_classes * dim],
            bias: vec![0.0; n_classes],
        })
    }

    pub fn from_parts(n_classes: usize, dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        let mut p = Self::zeros(n_classes, dim)?;
        if weights.len() != n_classes * dim {
            return Err(Error::DimensionMismatch {
                expected: n_classes * dim,
                actual: weights.len(),
            });
        }
        if bias.len() != n_classes {
            return Err(Error::DimensionMismatch {
                expected: n_classes,
                actual: bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        p.weights = weights;
        p.bias = bias;
        Ok(p)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.dim..(class + 1) * self.dim]
    }

    /// `W x + b`.
    pub fn forward(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok((0..self.n_classes).map(|k| x.dot(self.row(k)) + self.bias[k]).collect())
    }

    /// Index of the largest logit; ties go to the lower index.
    pub fn predict(&self, x: &FeatureVector) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }

    pub fn apply_gradient(&mut self, grad: &Gradient, learning_rate: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
            *w -= learning_rate * g;
        }
        for (b, g) in self.bias.iter_mut().zip(&grad.bias) {
            *b -= learning_rate * g;
        }
    }

    /// Header `skewlens-model v1 C=<c> D=<d>`, then `C` lines of `D` weights
    /// and one line of `C` biases, each value with 17 significant digits.
    pub fn to_model_text(&self) -> String {
        let mut out = format!("{MODEL_MAGIC} C={} D={}\n", self.n_classes, self.dim);
        let line = |out: &mut String, values: &[f64]| {
            let parts: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", parts.join(" "));
        };
        for k in 0..self.n_classes {
            line(&mut out, self.row(k));
        }
        line(&mut out, &self.bias);
        out
    }

    pub fn parse_model_text(text: &str) -> Result<Self> {
        let bad = |line: usize, m: String| Error::parse("<model>", line, m);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(1, "empty model file".into()))?;
        let rest = header
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| bad(1, format!("expected header starting with {MODEL_MAGIC:?}")))?;
        let mut c = None;
        let mut d = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("C=") {
                c = v.parse::<usize>().ok();
            } else if let Some(v) = field.strip_prefix("D=") {
                d = v.parse::<usize>().ok();
            }
        }
        let (c, d) = c.zip(d).ok_or_else(|| bad(1, "header must carry C=<c> D=<d>".into()))?;

        let parse_line = |lineno: usize, line: Option<&str>, expected: usize| -> Result<Vec<f64>> {
            let line = line.ok_or_else(|| bad(lineno, "unexpected end of model file".into()))?;
            let values = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(lineno, format!("bad number {t:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != expected {
                return Err(bad(
                    lineno,
                    format!("expected {expected} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };
        let mut weights = Vec::with_capacity(c * d);
        for k in 0..c {
            weights.extend(parse_line(k + 2, lines.next(), d)?);
        }
        let bias = parse_line(c + 2, lines.next(), c)?;
        Self::from_parts(c, d, weights, bias)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_model_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_model_text(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::parse(path, line, message),
            other => other,
        })
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
