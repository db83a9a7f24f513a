use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `(1/m) Σ_i ‖ŷ_i − y_i‖²`
    Plain,
    /// `(1/m) Σ_i ‖w ⊙ (ŷ_i − y_i)‖²` with [`make_weights`].
    Weighted,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Plain => "plain",
            LossKind::Weighted => "weighted",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(LossKind::Plain),
            "weighted" => Ok(LossKind::Weighted),
            other => Err(Error::arg(format!(
                "unknown loss kind {other:?} (expected plain or weighted)"
            ))),
        }
    }
}

/// Per-offset loss weights; index 0 is the nearest predicted day.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::arg("loss weights must be finite and strictly positive"));
        }
        Ok(WeightVector(w))
    }

    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Correction weights `w[j] = 1 + j/200`, growing with the days-ahead offset.
pub fn make_weights(forward_look: usize) -> WeightVector {
    WeightVector((0..forward_look).map(|j| 1.0 + j as f64 / 200.0).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    /// `dL/dŷ_i` for every prediction vector.
    pub grads: Vec<Vec<f64>>,
}

fn check_batch(pred: &[Vec<f64>], truth: &[Vec<f64>], width: Option<usize>) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Shape {
            op: "loss batch",
            left: (pred.len(), 0),
            right: (truth.len(), 0),
        });
    }
    if pred.is_empty() {
        return Err(Error::arg("loss over an empty batch"));
    }
    for (p, t) in pred.iter().zip(truth) {
        if p.len() != t.len() || width.is_some_and(|w| w != p.len()) {
            return Err(Error::Shape {
                op: "loss vector",
                left: (p.len(), width.unwrap_or(p.len())),
                right: (t.len(), 1),
            });
        }
    }
    Ok(())
}

fn weighted(pred: &[Vec<f64>], truth: &[Vec<f64>], w: Option<&[f64]>) -> LossOutput {
    let m = pred.len() as f64;
    let scale = 2.0 / m;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(truth) {
        let mut sq = 0.0;
        let mut g = Vec::with_capacity(p.len());
        for j in 0..p.len() {
            let r = p[j] - t[j];
            match w {
                Some(w) => {
                    let wr = w[j] * r;
                    sq += wr * wr;
                    g.push(scale * (w[j] * w[j]) * r);
                }
                None => {
                    sq += r * r;
                    g.push(scale * r);
                }
            }
        }
        total += sq;
        grads.push(g);
    }
    LossOutput {
        loss: total / m,
        grads,
    }
}

/// Mean over the batch of the squared Euclidean residual norm.
pub fn mse_loss(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<LossOutput> {
    check_batch(pred, truth, None)?;
    Ok(weighted(pred, truth, None))
}

pub fn weighted_mse_loss(pred: &[Vec<f64>], truth: &[Vec<f64>], w: &WeightVector) -> Result<LossOutput> {
    check_batch(pred, truth, Some(w.len()))?;
    Ok(weighted(pred, truth, Some(w.as_slice())))
}
