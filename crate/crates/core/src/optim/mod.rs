//! Losses, the Adam optimizer, finite-difference gradient checks and the
//! minibatch training loop.

mod adam;
mod gradcheck;
mod loss;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{compare_gradients, finite_diff_grad, GradCheckReport};
pub use loss::{make_weights, mse_loss, weighted_mse_loss, LossKind, LossOutput, WeightVector};
pub use train::{batch_gradient, train, EpochLoss, LossHistory, TrainConfig};
