//! Price series ingestion and supervised dataset assembly.
//!
//! Series are indexed by trading-day ordinal; calendar gaps are not filled.
//! Column 0 of every feature matrix is the adjusted close, which is also the
//! only target column. Extra columns (e.g. search volume) come from an
//! exogenous table joined on date.

mod correlation;
mod scaler;
mod series;
mod windows;

pub use correlation::{correlation_matrix, CorrelationReport};
pub use scaler::{apply_scaler, fit_scaler, inverse_scale, ScaledSeries, Scaler};
pub use series::{attach_exogenous, parse_exogenous_csv, parse_ohlcv_csv, PriceSeries};
pub use windows::{
    build_multistock, make_windows, split_train_dev, train_window_count, training_rows,
    window_count, WindowSource, WindowedDataset,
};
