use std::fmt;
use std::str::FromStr;

use crate::dataset::{ScaledSeries, Scaler};
use crate::error::{Error, Result};
use crate::lstm::Network;
use crate::ndcore::Matrix;

/// Anything that maps a scaled input window to a block of scaled predictions.
pub trait Predictor {
    fn past_history(&self) -> usize;
    fn forward_look(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn predict(&self, window: &Matrix) -> Result<Vec<f64>>;
}

impl Predictor for Network {
    fn past_history(&self) -> usize {
        self.spec.past_history
    }

    fn forward_look(&self) -> usize {
        self.spec.forward_look
    }

    fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        Network::predict(self, window)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastMode {
    GroundTruth,
    UpdatedTruth,
    Multiday,
}

impl fmt::Display for ForecastMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ForecastMode::GroundTruth => "ground_truth",
            ForecastMode::UpdatedTruth => "updated_truth",
            ForecastMode::Multiday => "multiday",
        })
    }
}

impl FromStr for ForecastMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground_truth" => Ok(ForecastMode::GroundTruth),
            "updated_truth" => Ok(ForecastMode::UpdatedTruth),
            "multiday" => Ok(ForecastMode::Multiday),
            other => Err(Error::arg(format!(
                "unknown forecast mode {other:?} (expected ground_truth, updated_truth or multiday)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastPoint {
    /// Emission step (0-based).
    pub step: usize,
    /// Days ahead within the emitted block (0 = next day).
    pub offset: usize,
    pub scaled: f64,
    /// De-normalized price.
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSeries {
    pub model_id: String,
    pub mode: ForecastMode,
    /// Series row predicted by step 0, offset 0, when known.
    pub origin: Option<usize>,
    pub horizon: usize,
    pub points: Vec<ForecastPoint>,
}

impl ForecastSeries {
    fn new(mode: ForecastMode, origin: Option<usize>, horizon: usize) -> Self {
        ForecastSeries {
            model_id: String::from("model"),
            mode,
            origin,
            horizon,
            points: Vec::new(),
        }
    }

    pub fn with_model_id(mut self, id: impl Into<String>) -> Self {
        self.model_id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn target_index(&self, p: &ForecastPoint) -> Option<usize> {
        self.origin.map(|o| o + p.step + p.offset)
    }

    pub fn scaled(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.scaled).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.price).collect()
    }

    /// Scaled predictions grouped by emission step, in offset order.
    pub fn blocks(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for p in &self.points {
            if out.len() <= p.step {
                out.resize_with(p.step + 1, Vec::new);
            }
            out[p.step].push(p.scaled);
        }
        out
    }

    /// `end_date,mode,offset,scaled_pred,price_pred,truth`. `end_date` is the
    /// date being predicted and `truth` its raw price; both are empty when the
    /// target falls outside `series`.
    pub fn to_csv(&self, series: Option<&ScaledSeries>) -> String {
        let mut out = String::from("end_date,mode,offset,scaled_pred,price_pred,truth\n");
        for p in &self.points {
            let target = self
                .target_index(p)
                .and_then(|t| series.filter(|s| t < s.len()).map(|s| (s, t)));
            let (date, truth) = match target {
                Some((s, t)) => (s.raw.dates[t].to_string(), s.raw.features.get(t, 0).to_string()),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{date},{},{},{},{},{truth}\n",
                self.mode, p.offset, p.scaled, p.price
            ));
        }
        out
    }
}

fn check_features(model: &dyn Predictor, features: usize) -> Result<()> {
    if model.input_dim() != features {
        return Err(Error::arg(format!(
            "model expects {} input features, series has {features}",
            model.input_dim()
        )));
    }
    Ok(())
}

fn check_range(series: &ScaledSeries, start: usize, past_history: usize, last_target: usize) -> Result<()> {
    if start < past_history {
        return Err(Error::arg(format!(
            "rollout start {start} leaves fewer than {past_history} history rows"
        )));
    }
    if last_target > series.len() {
        return Err(Error::arg(format!(
            "rollout needs rows up to {last_target}, series {} has {}",
            series.ticker(),
            series.len()
        )));
    }
    Ok(())
}

fn point(step: usize, offset: usize, scaled: f64, scaler: &Scaler) -> ForecastPoint {
    ForecastPoint {
        step,
        offset,
        scaled,
        price: scaler.inverse(0, scaled),
    }
}

/// Prediction `k` reads the true window ending at row `start + k − 1` and
/// targets row `start + k`.
pub fn teacher_forced_rollout(
    model: &dyn Predictor,
    series: &ScaledSeries,
    start: usize,
    horizon: usize,
) -> Result<ForecastSeries> {
    let ph = model.past_history();
    check_features(model, series.scaled.feature_count())?;
    check_range(series, start, ph, start + horizon)?;
    let mut out = ForecastSeries::new(ForecastMode::GroundTruth, Some(start), horizon);
    for k in 0..horizon {
        let window = series.window_ending_at(start + k, ph)?;
        let pred = model.predict(&window)?;
        out.points.push(point(k, 0, pred[0], &series.scaler));
    }
    Ok(out)
}

/// Rolls the model forward on its own next-day predictions.
pub fn autoregressive_rollout(
    model: &dyn Predictor,
    seed_window: &Matrix,
    horizon: usize,
    scaler: &Scaler,
) -> Result<ForecastSeries> {
    let ph = model.past_history();
    if seed_window.rows() != ph {
        return Err(Error::arg(format!(
            "seed window has {} rows, model needs past_history = {ph}",
            seed_window.rows()
        )));
    }
    check_features(model, seed_window.cols())?;
    let cols = seed_window.cols();
    let mut out = ForecastSeries::new(ForecastMode::UpdatedTruth, None, horizon);
    let mut window = seed_window.clone();
    for k in 0..horizon {
        let next = model.predict(&window)?[0];
        out.points.push(point(k, 0, next, scaler));
        if k + 1 < horizon {
            let mut data = Vec::with_capacity(ph * cols);
            data.extend_from_slice(&window.data()[cols..]);
            let last = window.row(ph - 1);
            data.push(next);
            data.extend_from_slice(&last[1..]);
            window = Matrix::from_vec(ph, cols, data)?;
        }
    }
    Ok(out)
}

/// Autoregressive rollout seeded with the true window ending before `start`.
pub fn autoregressive_from(
    model: &dyn Predictor,
    series: &ScaledSeries,
    start: usize,
    horizon: usize,
) -> Result<ForecastSeries> {
    check_range(series, start, model.past_history(), start)?;
    let seed = series.window_ending_at(start, model.past_history())?;
    let mut out = autoregressive_rollout(model, &seed, horizon, &series.scaler)?;
    out.origin = Some(start);
    Ok(out)
}

/// Which elements of each multi-day block to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRetention {
    Full,
    /// Only the element this many days ahead of each emission day.
    Offset(usize),
}

/// Emission `e` reads the true window ending at row `start + e − 1` and
/// predicts rows `start + e .. start + e + n`.
pub fn multiday_rollout(
    model: &dyn Predictor,
    series: &ScaledSeries,
    start: usize,
    emissions: usize,
    retention: BlockRetention,
) -> Result<ForecastSeries> {
    let ph = model.past_history();
    let n = model.forward_look();
    if let BlockRetention::Offset(j) = retention {
        if j >= n {
            return Err(Error::arg(format!("offset {j} outside block of length {n}")));
        }
    }
    check_features(model, series.scaled.feature_count())?;
    let last = if emissions == 0 { start } else { start + emissions + n - 1 };
    check_range(series, start, ph, last)?;
    let mut out = ForecastSeries::new(ForecastMode::Multiday, Some(start), emissions);
    for e in 0..emissions {
        let block = model.predict(&series.window_ending_at(start + e, ph)?)?;
        for (j, &v) in block.iter().enumerate() {
            if matches!(retention, BlockRetention::Offset(k) if k != j) {
                continue;
            }
            out.points.push(point(e, j, v, &series.scaler));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{PriceSeries, ScaledSeries};
    use crate::lstm::{Architecture, NetworkSpec};
    use crate::ndcore::Rng;
    use chrono::NaiveDate;

    /// Returns the window's last price, repeated.
    struct Persistence {
        ph: usize,
        n: usize,
    }

    impl Predictor for Persistence {
        fn past_history(&self) -> usize {
            self.ph
        }
        fn forward_look(&self) -> usize {
            self.n
        }
        fn input_dim(&self) -> usize {
            1
        }
        fn predict(&self, w: &Matrix) -> Result<Vec<f64>> {
            Ok(vec![w.get(w.rows() - 1, 0); self.n])
        }
    }

    fn sine_series(n: usize) -> ScaledSeries {
        let v: Vec<f64> = (0..n).map(|t| 10.0 + (t as f64 * 0.3).sin()).collect();
        let raw = PriceSeries::from_prices("S", NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), &v).unwrap();
        ScaledSeries::fit(raw, n).unwrap()
    }

    fn net(ph: usize, fl: usize, seed: u64) -> Network {
        let spec = NetworkSpec {
            architecture: Architecture::StackedLstm,
            stack_depth: 1,
            units: 3,
            input_dim: 1,
            past_history: ph,
            forward_look: fl,
        };
        Network::new(spec, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn zero_horizon_is_empty() {
        let s = sine_series(20);
        assert!(teacher_forced_rollout(&net(4, 1, 1), &s, 10, 0).unwrap().is_empty());
    }

    #[test]
    fn zero_network_gives_bias() {
        let s = sine_series(20);
        let mut m = Network::zeros(net(4, 1, 1).spec).unwrap();
        m.params.dense_bias = Matrix::column(&[0.3]);
        let f = teacher_forced_rollout(&m, &s, 5, 6).unwrap();
        assert!(f.scaled().iter().all(|&v| v == 0.3));
        let expect = s.scaler.inverse(0, 0.3);
        assert!(f.prices().iter().all(|&p| p == expect));
    }

    #[test]
    fn teacher_forced_matches_manual_calls() {
        let s = sine_series(30);
        let m = net(4, 1, 2);
        let f = teacher_forced_rollout(&m, &s, 10, 5).unwrap();
        for k in 0..5 {
            let w = s.scaled.features.slice_rows(6 + k, 10 + k);
            assert_eq!(f.points[k].scaled, m.forward_window(&w).unwrap().0[0]);
            assert_eq!(f.target_index(&f.points[k]), Some(10 + k));
        }
    }

    #[test]
    fn teacher_forced_range_errors() {
        let s = sine_series(12);
        let m = net(4, 1, 2);
        assert!(teacher_forced_rollout(&m, &s, 3, 1).is_err());
        assert!(teacher_forced_rollout(&m, &s, 10, 3).is_err());
    }

    #[test]
    fn autoregressive_single_step_equals_teacher_forced() {
        let s = sine_series(30);
        let m = net(5, 1, 3);
        let a = autoregressive_from(&m, &s, 12, 1).unwrap();
        let t = teacher_forced_rollout(&m, &s, 12, 1).unwrap();
        assert_eq!(a.points, t.points);
    }

    #[test]
    fn persistence_is_a_fixed_point() {
        let s = sine_series(30);
        let p = Persistence { ph: 5, n: 1 };
        let f = autoregressive_from(&p, &s, 12, 8).unwrap();
        let last = s.scaled.features.get(11, 0);
        assert!(f.scaled().iter().all(|&v| v == last));
    }

    #[test]
    fn autoregressive_matches_hand_loop() {
        let s = sine_series(40);
        let m = net(6, 1, 4);
        let f = autoregressive_from(&m, &s, 20, 10).unwrap();
        let mut hist: Vec<f64> = s.scaled.prices()[14..20].to_vec();
        for k in 0..10 {
            let w = Matrix::from_vec(6, 1, hist[hist.len() - 6..].to_vec()).unwrap();
            let y = m.forward_window(&w).unwrap().0[0];
            assert_eq!(f.points[k].scaled, y);
            hist.push(y);
        }
    }

    #[test]
    fn autoregressive_freezes_exogenous_columns() {
        struct Echo;
        impl Predictor for Echo {
            fn past_history(&self) -> usize {
                3
            }
            fn forward_look(&self) -> usize {
                1
            }
            fn input_dim(&self) -> usize {
                2
            }
            fn predict(&self, w: &Matrix) -> Result<Vec<f64>> {
                // Price + exogenous of the last row; exposes what was fed back.
                Ok(vec![w.get(2, 0) + w.get(2, 1)])
            }
        }
        let seed = Matrix::from_rows(&[vec![0.0, 9.0], vec![0.0, 9.0], vec![1.0, 0.5]]).unwrap();
        let sc = Scaler::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let f = autoregressive_rollout(&Echo, &seed, 3, &sc).unwrap();
        assert_eq!(f.scaled(), vec![1.5, 2.0, 2.5]);
    }

    #[test]
    fn wrong_seed_length() {
        let m = net(5, 1, 3);
        let sc = Scaler::new(vec![0.0], vec![1.0]).unwrap();
        assert!(autoregressive_rollout(&m, &Matrix::zeros(4, 1), 3, &sc).is_err());
    }

    #[test]
    fn multiday_one_reduces_to_teacher_forced() {
        let s = sine_series(40);
        let m = net(6, 1, 5);
        let a = multiday_rollout(&m, &s, 10, 12, BlockRetention::Full).unwrap();
        let b = teacher_forced_rollout(&m, &s, 10, 12).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn multiday_blocks_follow_window_provenance() {
        let s = sine_series(40);
        let m = net(5, 3, 6);
        let f = multiday_rollout(&m, &s, 10, 4, BlockRetention::Full).unwrap();
        let blocks = f.blocks();
        assert_eq!(blocks.len(), 4);
        for (e, b) in blocks.iter().enumerate() {
            let w = s.scaled.features.slice_rows(5 + e, 10 + e);
            assert_eq!(b, &m.forward_window(&w).unwrap().0);
        }
        let kept = multiday_rollout(&m, &s, 10, 4, BlockRetention::Offset(2)).unwrap();
        assert_eq!(kept.len(), 4);
        assert!(kept.points.iter().all(|p| p.offset == 2));
        assert_eq!(kept.points[1].scaled, blocks[1][2]);
        assert!(multiday_rollout(&m, &s, 10, 4, BlockRetention::Offset(3)).is_err());
        assert!(multiday_rollout(&m, &s, 10, 29, BlockRetention::Full).is_err());
    }

    #[test]
    fn csv_has_dates_and_truth() {
        let s = sine_series(20);
        let m = net(4, 1, 7);
        let f = teacher_forced_rollout(&m, &s, 10, 2).unwrap();
        let csv = f.to_csv(Some(&s));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "end_date,mode,offset,scaled_pred,price_pred,truth");
        assert!(lines[1].starts_with("2020-01-11,ground_truth,0,"));
        assert!(lines[1].ends_with(&s.raw.features.get(10, 0).to_string()));
        let free = autoregressive_rollout(&m, &s.window_ending_at(20, 4).unwrap(), 1, &s.scaler).unwrap();
        assert!(free.to_csv(Some(&s)).lines().nth(1).unwrap().starts_with(",updated_truth,0,"));
    }
}
