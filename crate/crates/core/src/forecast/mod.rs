//! Inference-time rollouts, error metrics and the cross-model RMSE grid.
//!
//! Three rollout modes:
//!
//! - **ground truth** (teacher forced): every prediction reads the true window
//!   ending the day before its target. A reference; not available live.
//! - **updated truth** (autoregressive): the window starts from true history
//!   and each prediction is appended as if observed. Exogenous columns, if any,
//!   are held at their last observed value while rolling.
//! - **multi-day**: a `forward_look = n` model emits an `n`-day block from the
//!   true window ending at each successive day.

mod metrics;
mod rollout;

pub use metrics::{convergence_profile, mse, rmse, rmse_grid, EvalTarget};
pub use rollout::{
    autoregressive_from, autoregressive_rollout, multiday_rollout, teacher_forced_rollout,
    BlockRetention, ForecastMode, ForecastPoint, ForecastSeries, Predictor,
};
