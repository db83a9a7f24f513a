use std::collections::HashSet;

use chrono::NaiveDate;

use super::PriceSeries;
use crate::error::{Error, Result};
use crate::ndcore::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub tickers: Vec<String>,
    /// Pearson correlations of adjusted closes; symmetric with unit diagonal.
    pub matrix: Matrix,
    /// Off-diagonal pairs involving a zero-variance series, stored as 0.
    pub undefined: Vec<(usize, usize)>,
    /// Number of common dates used.
    pub overlap: usize,
}

/// Pearson correlation of adjusted closes over the dates all series share.
pub fn correlation_matrix(series_list: &[PriceSeries]) -> Result<CorrelationReport> {
    if series_list.is_empty() {
        return Err(Error::arg("correlation needs at least one series"));
    }
    let mut common: HashSet<NaiveDate> = series_list[0].dates.iter().copied().collect();
    for s in &series_list[1..] {
        let these: HashSet<NaiveDate> = s.dates.iter().copied().collect();
        common.retain(|d| these.contains(d));
    }
    let mut dates: Vec<NaiveDate> = common.into_iter().collect();
    dates.sort();
    if dates.len() < 2 {
        return Err(Error::arg(format!(
            "series share only {} common dates; need at least 2",
            dates.len()
        )));
    }

    let centered: Vec<Vec<f64>> = series_list
        .iter()
        .map(|s| {
            let values: Vec<f64> = dates
                .iter()
                .map(|d| {
                    let r = s.dates.binary_search(d).expect("date in intersection");
                    s.features.get(r, 0)
                })
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let n = series_list.len();
    let mut matrix = Matrix::identity(n);
    let mut undefined = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let r = if norms[i] == 0.0 || norms[j] == 0.0 {
                undefined.push((i, j));
                0.0
            } else {
                let cross: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                (cross / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            matrix.set(i, j, r);
            matrix.set(j, i, r);
        }
    }
    Ok(CorrelationReport {
        tickers: series_list.iter().map(|s| s.ticker.clone()).collect(),
        matrix,
        undefined,
        overlap: dates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(t: &str, v: &[f64]) -> PriceSeries {
        PriceSeries::from_prices(t, NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), v).unwrap()
    }

    #[test]
    fn self_and_anti_correlation() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| 10.0 - v).collect();
        let r = correlation_matrix(&[series("A", &x), series("B", &x), series("C", &neg)]).unwrap();
        assert!((r.matrix.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((r.matrix.get(0, 2) + 1.0).abs() < 1e-15);
        assert_eq!(r.matrix.get(2, 2), 1.0);
    }

    #[test]
    fn constant_series_flagged() {
        let r = correlation_matrix(&[series("A", &[1.0, 2.0, 3.0]), series("B", &[2.0; 3])]).unwrap();
        assert_eq!(r.matrix.get(0, 1), 0.0);
        assert_eq!(r.undefined, vec![(0, 1)]);
    }

    #[test]
    fn uses_date_intersection() {
        let a = series("A", &[1.0, 2.0, 3.0, 4.0]);
        let mut b = series("B", &[9.0, 1.0, 2.0]);
        b.dates = b.dates.iter().map(|d| *d + chrono::Days::new(1)).collect();
        let r = correlation_matrix(&[a, b]).unwrap();
        assert_eq!(r.overlap, 3);
    }

    #[test]
    fn single_series_is_identity() {
        assert!(correlation_matrix(&[]).is_err());
        let r = correlation_matrix(&[series("A", &[1.0, 2.0])]).unwrap();
        assert_eq!(r.matrix, Matrix::identity(1));
    }
}
