use super::rollout::{autoregressive_from, Predictor};
use crate::dataset::ScaledSeries;
use crate::error::{Error, Result};
use crate::ndcore::Matrix;

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Shape {
            op: "metric",
            left: (pred.len(), 1),
            right: (truth.len(), 1),
        });
    }
    if pred.is_empty() {
        return Err(Error::arg("metric over empty vectors"));
    }
    Ok(())
}

/// Mean squared difference.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    mse(pred, truth).map(f64::sqrt)
}

/// Mean absolute error per days-ahead offset across multi-day blocks.
pub fn convergence_profile(blocks: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<Vec<f64>> {
    if blocks.is_empty() || blocks.len() != truth.len() {
        return Err(Error::arg(format!(
            "need matching, nonempty block lists ({} blocks, {} truths)",
            blocks.len(),
            truth.len()
        )));
    }
    let n = blocks[0].len();
    let mut acc = vec![0.0; n];
    for (b, t) in blocks.iter().zip(truth) {
        if b.len() != n || t.len() != n {
            return Err(Error::Shape {
                op: "convergence_profile",
                left: (n, 1),
                right: (b.len(), t.len()),
            });
        }
        for j in 0..n {
            acc[j] += (b[j] - t[j]).abs();
        }
    }
    Ok(acc.into_iter().map(|s| s / blocks.len() as f64).collect())
}

/// A held-out series and the stretch of it to forecast.
#[derive(Debug, Clone)]
pub struct EvalTarget {
    pub series: ScaledSeries,
    pub start: usize,
    pub horizon: usize,
}

impl EvalTarget {
    pub fn truth(&self) -> Vec<f64> {
        (self.start..self.start + self.horizon)
            .map(|r| self.series.scaled.features.get(r, 0))
            .collect()
    }
}

/// Entry `(i, j)`: scaled RMSE of model `i`'s autoregressive rollout on target `j`.
pub fn rmse_grid(models: &[&dyn Predictor], targets: &[EvalTarget]) -> Result<Matrix> {
    let mut grid = Matrix::zeros(models.len(), targets.len());
    for (i, model) in models.iter().enumerate() {
        for (j, target) in targets.iter().enumerate() {
            let name = |e: Error| {
                Error::arg(format!("grid cell (model {i}, series {}): {e}", target.series.ticker()))
            };
            let f = autoregressive_from(*model, &target.series, target.start, target.horizon).map_err(name)?;
            let r = rmse(&f.scaled(), &target.truth()).map_err(name)?;
            grid.set(i, j, r);
        }
    }
    Ok(grid)
}
