use chrono::NaiveDate;

use super::PriceSeries;
use crate::error::{Error, Result};
use crate::ndcore::Matrix;

/// Where a window came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSource {
    pub ticker: String,
    /// Row of the first input day in the source series.
    pub start: usize,
    pub input_end_date: NaiveDate,
    pub target_end_date: NaiveDate,
}

/// Supervised pairs: `past_history x features` inputs and `forward_look` targets.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub past_history: usize,
    pub forward_look: usize,
    pub inputs: Vec<Matrix>,
    pub targets: Vec<Vec<f64>>,
    pub sources: Vec<WindowSource>,
}

impl WindowedDataset {
    pub fn empty(past_history: usize, forward_look: usize) -> Self {
        WindowedDataset {
            past_history,
            forward_look,
            inputs: Vec::new(),
            targets: Vec::new(),
            sources: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn feature_count(&self) -> Option<usize> {
        self.inputs.first().map(Matrix::cols)
    }

    fn take(&self, range: std::ops::Range<usize>) -> Self {
        WindowedDataset {
            past_history: self.past_history,
            forward_look: self.forward_look,
            inputs: self.inputs[range.clone()].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            sources: self.sources[range].to_vec(),
        }
    }

    fn append(&mut self, other: WindowedDataset) {
        self.inputs.extend(other.inputs);
        self.targets.extend(other.targets);
        self.sources.extend(other.sources);
    }
}

/// `len − past_history − forward_look + 1`, or 0 when the series is too short.
pub fn window_count(len: usize, past_history: usize, forward_look: usize) -> usize {
    (len + 1).saturating_sub(past_history + forward_look)
}

/// Number of windows assigned to training by a chronological split.
pub fn train_window_count(windows: usize, ratio: f64) -> usize {
    // Small slack keeps products such as 0.29 * 100 from flooring to 28.
    ((ratio * windows as f64 + 1e-9).floor() as usize).min(windows)
}

/// Rows `[0, n)` touched by the training windows (inputs and targets) of a
/// series of length `len`; scalers are fitted on exactly these rows.
pub fn training_rows(len: usize, past_history: usize, forward_look: usize, ratio: f64) -> usize {
    let n = window_count(len, past_history, forward_look);
    let train = train_window_count(n, ratio);
    if train == 0 {
        len.min(past_history)
    } else {
        train + past_history + forward_look - 1
    }
}

/// Slides a window of `past_history` rows over `series`, pairing each with
/// the next `forward_look` adjusted closes.
pub fn make_windows(series: &PriceSeries, past_history: usize, forward_look: usize) -> Result<WindowedDataset> {
    if past_history == 0 || forward_look == 0 {
        return Err(Error::arg("past_history and forward_look must be at least 1"));
    }
    let needed = past_history + forward_look;
    if series.len() < needed {
        return Err(Error::arg(format!(
            "series {} has {} rows; at least {needed} (past_history + forward_look) are required",
            series.ticker,
            series.len()
        )));
    }
    let n = window_count(series.len(), past_history, forward_look);
    let mut ds = WindowedDataset::empty(past_history, forward_look);
    for k in 0..n {
        let target_start = k + past_history;
        ds.inputs.push(series.features.slice_rows(k, target_start));
        ds.targets.push(
            (target_start..target_start + forward_look)
                .map(|r| series.features.get(r, 0))
                .collect(),
        );
        ds.sources.push(WindowSource {
            ticker: series.ticker.clone(),
            start: k,
            input_end_date: series.dates[target_start - 1],
            target_end_date: series.dates[target_start + forward_look - 1],
        });
    }
    Ok(ds)
}

/// Chronological split: the first `⌊ratio·N⌋` windows (by target end date) train.
pub fn split_train_dev(ds: &WindowedDataset, ratio: f64) -> Result<(WindowedDataset, WindowedDataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::arg(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by_key(|&i| ds.sources[i].target_end_date);
    let sorted = if order.iter().enumerate().all(|(a, &b)| a == b) {
        ds.clone()
    } else {
        WindowedDataset {
            past_history: ds.past_history,
            forward_look: ds.forward_look,
            inputs: order.iter().map(|&i| ds.inputs[i].clone()).collect(),
            targets: order.iter().map(|&i| ds.targets[i].clone()).collect(),
            sources: order.iter().map(|&i| ds.sources[i].clone()).collect(),
        }
    };
    let cut = train_window_count(ds.len(), ratio);
    Ok((sorted.take(0..cut), sorted.take(cut..ds.len())))
}

/// Pools windows across several already-scaled tickers.
///
/// With `same_ticker_test_train`, each ticker is split chronologically and the
/// pieces are pooled. Otherwise every window of `holdout` goes to dev and the
/// other tickers' windows all go to train.
pub fn build_multistock(
    series_list: &[PriceSeries],
    past_history: usize,
    forward_look: usize,
    ratio: f64,
    same_ticker_test_train: bool,
    holdout: Option<&str>,
) -> Result<(WindowedDataset, WindowedDataset)> {
    if series_list.len() < 2 {
        return Err(Error::arg("multi-stock datasets need at least two tickers"));
    }
    for (i, s) in series_list.iter().enumerate() {
        if series_list[..i].iter().any(|o| o.ticker == s.ticker) {
            return Err(Error::arg(format!("ticker {} listed twice", s.ticker)));
        }
        if s.feature_count() != series_list[0].feature_count() {
            return Err(Error::arg(format!(
                "ticker {} has {} features, {} has {}",
                s.ticker,
                s.feature_count(),
                series_list[0].ticker,
                series_list[0].feature_count()
            )));
        }
    }
    let mut train = WindowedDataset::empty(past_history, forward_look);
    let mut dev = WindowedDataset::empty(past_history, forward_look);

    if same_ticker_test_train {
        for s in series_list {
            let (tr, dv) = split_train_dev(&make_windows(s, past_history, forward_look)?, ratio)?;
            train.append(tr);
            dev.append(dv);
        }
    } else {
        let holdout = holdout.ok_or_else(|| {
            Error::arg("a holdout ticker is required when same_ticker_test_train is false")
        })?;
        if !series_list.iter().any(|s| s.ticker == holdout) {
            return Err(Error::arg(format!("holdout ticker {holdout} is not among the series")));
        }
        for s in series_list {
            let ds = make_windows(s, past_history, forward_look)?;
            if s.ticker == holdout {
                dev.append(ds);
            } else {
                train.append(ds);
            }
        }
    }
    Ok((train, dev))
}
