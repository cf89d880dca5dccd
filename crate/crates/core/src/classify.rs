//! Binary logistic regression trained by full-batch gradient descent.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on the weights (the bias is not penalized).
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 2000,
            l2: 1e-4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive"));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be at least 1"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidArgument("l2 must be nonnegative"));
        }
        Ok(())
    }
}

/// Decision rule `classes[1]` iff `weightsᵀz + bias ≥ 0`, else `classes[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: DVector<f64>,
    pub bias: f64,
    /// Label values for the negative and positive side.
    pub classes: [i64; 2],
}

impl LinearClassifier {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, z: &DMatrix<f64>) -> Result<DVector<f64>> {
        if z.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.ncols(),
            });
        }
        Ok((z * &self.weights).add_scalar(self.bias))
    }
}

#[inline]
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + libm::log1p(libm::exp(-s))
    } else {
        libm::log1p(libm::exp(s))
    }
}

#[inline]
fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

/// Mean cross-entropy plus `l2/2·‖w‖²`; `targets` are 0/1.
pub fn logistic_loss(z: &DMatrix<f64>, targets: &[f64], weights: &DVector<f64>, bias: f64, l2: f64) -> f64 {
    let scores = (z * weights).add_scalar(bias);
    let n = targets.len() as f64;
    let data: f64 = scores
        .iter()
        .zip(targets)
        .map(|(&s, &y)| softplus(s) - y * s)
        .sum();
    data / n + 0.5 * l2 * weights.norm_squared()
}

/// Gradient of [`logistic_loss`] with respect to `(weights, bias)`.
pub fn logistic_gradient(
    z: &DMatrix<f64>,
    targets: &[f64],
    weights: &DVector<f64>,
    bias: f64,
    l2: f64,
) -> (DVector<f64>, f64) {
    let n = targets.len() as f64;
    let scores = (z * weights).add_scalar(bias);
    let residual = DVector::from_iterator(
        targets.len(),
        scores.iter().zip(targets).map(|(&s, &y)| (sigmoid(s) - y) / n),
    );
    let gw = z.tr_mul(&residual) + weights * l2;
    (gw, residual.sum())
}

/// Maps a binary label vector to 0/1 targets, returning the sorted class pair.
fn binary_targets(labels: &[i64]) -> Result<([i64; 2], Vec<f64>)> {
    let lo = labels.iter().copied().min();
    let hi = labels.iter().copied().max();
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::DegenerateLabels("no labeled instances"));
    };
    if lo == hi {
        return Err(Error::DegenerateLabels("only one class present"));
    }
    if labels.iter().any(|&l| l != lo && l != hi) {
        return Err(Error::DegenerateLabels("more than two classes"));
    }
    let targets = labels.iter().map(|&l| if l == hi { 1.0 } else { 0.0 }).collect();
    Ok(([lo, hi], targets))
}

/// Fits a logistic model from a zero start. A step that would increase the
/// loss is retried with half the learning rate, so the loss never goes up.
pub fn train_logistic(z: &Dataset, cfg: &TrainConfig) -> Result<LinearClassifier> {
    cfg.validate()?;
    let labels = z
        .labels()
        .ok_or(Error::DegenerateLabels("dataset has no labels"))?;
    let (classes, targets) = binary_targets(labels)?;
    let x = z.values();

    let mut w = DVector::zeros(x.ncols());
    let mut b = 0.0;
    let mut loss = logistic_loss(x, &targets, &w, b, cfg.l2);
    let mut lr = cfg.learning_rate;
    for _ in 0..cfg.epochs {
        let (gw, gb) = logistic_gradient(x, &targets, &w, b, cfg.l2);
        if gw.norm_squared() + gb * gb == 0.0 {
            break;
        }
        let mut moved = false;
        for _ in 0..60 {
            let w_next = &w - &gw * lr;
            let b_next = b - gb * lr;
            let next = logistic_loss(x, &targets, &w_next, b_next, cfg.l2);
            if next <= loss {
                w = w_next;
                b = b_next;
                loss = next;
                moved = true;
                break;
            }
            lr *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::ObjectiveDiverged);
    }
    Ok(LinearClassifier {
        weights: w,
        bias: b,
        classes,
    })
}

pub fn predict(model: &LinearClassifier, z: &DMatrix<f64>) -> Result<Vec<i64>> {
    let d = model.decision(z)?;
    Ok(d.iter()
        .map(|&s| if s >= 0.0 { model.classes[1] } else { model.classes[0] })
        .collect())
}

/// Fraction of positions where `pred` and `truth` agree.
pub fn accuracy(pred: &[i64], truth: &[i64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InsufficientInstances { needed: 1, got: 0 });
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Accuracy of `model` on a labeled dataset.
pub fn evaluate(model: &LinearClassifier, z: &Dataset) -> Result<f64> {
    let truth = z
        .labels()
        .ok_or(Error::DegenerateLabels("dataset has no labels"))?;
    accuracy(&predict(model, z.values())?, truth)
}
