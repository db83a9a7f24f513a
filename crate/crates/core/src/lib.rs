//! From-scratch LSTM price forecasting and an end-of-day trading backtester.
//!
//! The crate is layered bottom-up:
//!
//! - [`ndcore`]: row-major `f64` matrices, activations and a portable seeded PRNG.
//! - [`lstm`]: LSTM cells, stacked many-to-one networks and an encoder-decoder,
//!   with hand-written backpropagation through time.
//! - [`optim`]: plain and weighted MSE losses, Adam, the finite-difference
//!   gradient oracle and the minibatch training loop.
//! - [`dataset`]: CSV ingestion, min-max scaling, sliding windows, multi-stock
//!   assembly, exogenous columns and cross-ticker correlation.
//! - [`forecast`]: ground-truth, autoregressive and multi-day rollouts, error
//!   metrics and the cross-model RMSE grid.
//! - [`stockbot`]: the curvature-based buy/sell rule and the portfolio simulator.

pub mod dataset;
pub mod error;
pub mod forecast;
pub mod lstm;
pub mod ndcore;
pub mod optim;
pub mod stockbot;

pub use error::{Error, Result};
