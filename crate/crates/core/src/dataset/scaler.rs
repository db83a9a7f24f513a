use std::ops::Range;

use super::PriceSeries;
use crate::error::{Error, Result};
use crate::ndcore::Matrix;

/// Per-feature min-max transform onto `[0, 1]`.
///
/// A feature with `max == min` is degenerate: it scales to 0 and inverts to `min`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::arg("scaler needs matching, nonempty min/max vectors"));
        }
        if min.iter().zip(&max).any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::arg("scaler requires finite min <= max per feature"));
        }
        Ok(Scaler { min, max })
    }

    pub fn feature_count(&self) -> usize {
        self.min.len()
    }

    pub fn is_degenerate(&self, feature: usize) -> bool {
        self.max[feature] == self.min[feature]
    }

    pub fn transform(&self, feature: usize, x: f64) -> f64 {
        if self.is_degenerate(feature) {
            0.0
        } else {
            (x - self.min[feature]) / (self.max[feature] - self.min[feature])
        }
    }

    pub fn inverse(&self, feature: usize, v: f64) -> f64 {
        v * (self.max[feature] - self.min[feature]) + self.min[feature]
    }
}

/// Fits per-feature min/max over the rows in `fit_range` only.
pub fn fit_scaler(series: &PriceSeries, fit_range: Range<usize>) -> Result<Scaler> {
    if fit_range.is_empty() || fit_range.end > series.len() {
        return Err(Error::arg(format!(
            "scaler fit range {fit_range:?} is empty or outside series of length {}",
            series.len()
        )));
    }
    let cols = series.feature_count();
    let mut min = vec![f64::INFINITY; cols];
    let mut max = vec![f64::NEG_INFINITY; cols];
    for r in fit_range {
        for (c, &v) in series.features.row(r).iter().enumerate() {
            min[c] = min[c].min(v);
            max[c] = max[c].max(v);
        }
    }
    Scaler::new(min, max)
}

pub fn apply_scaler(series: &PriceSeries, scaler: &Scaler) -> Result<PriceSeries> {
    if series.feature_count() != scaler.feature_count() {
        return Err(Error::Shape {
            op: "apply_scaler",
            left: (series.len(), series.feature_count()),
            right: (1, scaler.feature_count()),
        });
    }
    let mut features = Matrix::zeros(series.len(), series.feature_count());
    for r in 0..series.len() {
        for (c, (&x, out)) in series.features.row(r).iter().zip(features.row_mut(r)).enumerate() {
            *out = scaler.transform(c, x);
        }
    }
    Ok(PriceSeries {
        features,
        ..series.clone()
    })
}

/// Maps scaled values of `feature` back to raw units.
pub fn inverse_scale(values: &[f64], scaler: &Scaler, feature: usize) -> Result<Vec<f64>> {
    if feature >= scaler.feature_count() {
        return Err(Error::arg(format!(
            "feature {feature} out of range for scaler with {} features",
            scaler.feature_count()
        )));
    }
    Ok(values.iter().map(|&v| scaler.inverse(feature, v)).collect())
}

/// A raw series together with its scaled copy and the scaler between them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSeries {
    pub raw: PriceSeries,
    pub scaled: PriceSeries,
    pub scaler: Scaler,
}

impl ScaledSeries {
    /// Fits the scaler on the first `fit_rows` rows.
    pub fn fit(raw: PriceSeries, fit_rows: usize) -> Result<Self> {
        let scaler = fit_scaler(&raw, 0..fit_rows)?;
        Self::with_scaler(raw, scaler)
    }

    pub fn with_scaler(raw: PriceSeries, scaler: Scaler) -> Result<Self> {
        let scaled = apply_scaler(&raw, &scaler)?;
        Ok(ScaledSeries { raw, scaled, scaler })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn ticker(&self) -> &str {
        &self.raw.ticker
    }

    /// Scaled input window of rows `[end - past_history, end)`.
    pub fn window_ending_at(&self, end: usize, past_history: usize) -> Result<Matrix> {
        if end < past_history || end > self.len() {
            return Err(Error::arg(format!(
                "window of {past_history} rows ending before row {end} does not fit series of length {}",
                self.len()
            )));
        }
        Ok(self.scaled.features.slice_rows(end - past_history, end))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> PriceSeries {
        PriceSeries::from_prices("T", NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), v).unwrap()
    }

    #[test]
    fn fit_full_and_partial() {
        let s = series(&[10.0, 20.0, 30.0]);
        let full = fit_scaler(&s, 0..3).unwrap();
        assert_eq!((full.min[0], full.max[0]), (10.0, 30.0));
        let part = fit_scaler(&s, 0..2).unwrap();
        assert_eq!((part.min[0], part.max[0]), (10.0, 20.0));
        let scaled = apply_scaler(&s, &part).unwrap();
        assert_eq!(scaled.prices(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn transform_hand_values() {
        let s = series(&[10.0, 20.0, 30.0]);
        let sc = fit_scaler(&s, 0..3).unwrap();
        assert_eq!(apply_scaler(&s, &sc).unwrap().prices(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let s = series(&[4.0, 4.0, 4.0]);
        let sc = fit_scaler(&s, 0..3).unwrap();
        assert!(sc.is_degenerate(0));
        assert_eq!(apply_scaler(&s, &sc).unwrap().prices(), vec![0.0; 3]);
        assert_eq!(inverse_scale(&[0.0], &sc, 0).unwrap(), vec![4.0]);
    }

    #[test]
    fn empty_range_rejected() {
        let s = series(&[1.0, 2.0]);
        assert!(fit_scaler(&s, 1..1).is_err());
        assert!(fit_scaler(&s, 0..3).is_err());
    }

    #[test]
    fn feature_count_mismatch() {
        let s = series(&[1.0, 2.0]);
        let sc = Scaler::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(apply_scaler(&s, &sc), Err(Error::Shape { .. })));
    }

    proptest! {
        #[test]
        fn round_trip(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
            let s = series(&values);
            let sc = fit_scaler(&s, 0..values.len()).unwrap();
            prop_assume!(!sc.is_degenerate(0));
            let scaled = apply_scaler(&s, &sc).unwrap().prices();
            let back = inverse_scale(&scaled, &sc, 0).unwrap();
            for (a, b) in back.iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
