//! Command layer for the stockbot pipeline: configuration, checkpoints and
//! the `train` / `predict` / `backtest` / `grid` commands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::{Group, RunConfig};
pub use error::{CliError, CliResult};
