use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ndcore::Matrix;

/// Dated feature table for one ticker; column 0 is the adjusted close.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    /// `len x feature_count`.
    pub features: Matrix,
    pub columns: Vec<String>,
    /// Rows discarded during ingestion or joins.
    pub dropped_rows: usize,
}

impl PriceSeries {
    pub fn new(
        ticker: impl Into<String>,
        dates: Vec<NaiveDate>,
        features: Matrix,
        columns: Vec<String>,
    ) -> Result<Self> {
        if features.rows() != dates.len() {
            return Err(Error::Shape {
                op: "price series",
                left: (dates.len(), columns.len()),
                right: features.shape(),
            });
        }
        if features.cols() == 0 || features.cols() != columns.len() {
            return Err(Error::arg(format!(
                "price series needs at least one feature and a name per column ({} columns, {} names)",
                features.cols(),
                columns.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::arg(format!(
                "dates must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if !features.is_finite() {
            return Err(Error::arg("price series contains non-finite values"));
        }
        Ok(PriceSeries {
            ticker: ticker.into(),
            dates,
            features,
            columns,
            dropped_rows: 0,
        })
    }

    /// Convenience constructor for a price-only series on consecutive days.
    pub fn from_prices(ticker: impl Into<String>, start: NaiveDate, prices: &[f64]) -> Result<Self> {
        let dates = (0..prices.len())
            .map(|k| start + chrono::Days::new(k as u64))
            .collect();
        PriceSeries::new(
            ticker,
            dates,
            Matrix::from_vec(prices.len(), 1, prices.to_vec())?,
            vec!["Adj Close".into()],
        )
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    /// Adjusted close column.
    pub fn prices(&self) -> Vec<f64> {
        self.features.col(0)
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::Format(format!("line {line}: bad date {s:?}: {e}")))
}

fn parse_value(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn sort_and_check(rows: &mut [(NaiveDate, Vec<f64>)]) -> Result<()> {
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Format(format!("duplicate date {}", w[0].0)));
    }
    Ok(())
}

/// Parses a Yahoo! Finance daily export (`Date,Open,High,Low,Close,Adj Close,Volume`).
///
/// Only `Date` and `Adj Close` are required. Rows whose adjusted close is
/// empty, `null` or otherwise non-numeric are dropped and counted in
/// `dropped_rows`.
pub fn parse_ohlcv_csv(text: &str, ticker: &str) -> Result<PriceSeries> {
    let mut rdr = reader(text);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing required column {name:?}")))
    };
    let date_col = find("Date")?;
    let close_col = find("Adj Close")?;

    let mut rows = Vec::new();
    let mut dropped = 0;
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        let date = parse_date(rec.get(date_col).unwrap_or(""), line)?;
        match rec.get(close_col).and_then(parse_value) {
            Some(v) => rows.push((date, vec![v])),
            None => dropped += 1,
        }
    }
    sort_and_check(&mut rows)?;
    let mut series = assemble(ticker, rows, vec!["Adj Close".into()])?;
    series.dropped_rows = dropped;
    Ok(series)
}

/// Parses an exogenous feature table `Date,<name1>,<name2>,…`. Rows with any
/// missing or non-numeric value are dropped.
pub fn parse_exogenous_csv(text: &str, name: &str) -> Result<PriceSeries> {
    let mut rdr = reader(text);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    if header.get(0) != Some("Date") {
        return Err(Error::Format("exogenous table must start with a Date column".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if columns.is_empty() {
        return Err(Error::Format("exogenous table has no value columns".into()));
    }

    let mut rows = Vec::new();
    let mut dropped = 0;
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        let date = parse_date(rec.get(0).unwrap_or(""), line)?;
        let values: Option<Vec<f64>> = (1..=columns.len())
            .map(|c| rec.get(c).and_then(parse_value))
            .collect();
        match values {
            Some(v) => rows.push((date, v)),
            None => dropped += 1,
        }
    }
    sort_and_check(&mut rows)?;
    let mut series = assemble(name, rows, columns)?;
    series.dropped_rows = dropped;
    Ok(series)
}

fn assemble(ticker: &str, rows: Vec<(NaiveDate, Vec<f64>)>, columns: Vec<String>) -> Result<PriceSeries> {
    let width = columns.len();
    let mut dates = Vec::with_capacity(rows.len());
    let mut data = Vec::with_capacity(rows.len() * width);
    for (d, v) in rows {
        dates.push(d);
        data.extend(v);
    }
    let n = dates.len();
    PriceSeries::new(ticker, dates, Matrix::from_vec(n, width, data)?, columns)
}

/// Inner join on date: appends the exogenous columns after the series' own.
/// Rows present in only one table are dropped and added to `dropped_rows`.
pub fn attach_exogenous(series: &PriceSeries, exo: &PriceSeries) -> Result<PriceSeries> {
    let (mut a, mut b) = (0, 0);
    let mut dates = Vec::new();
    let mut data = Vec::new();
    while a < series.len() && b < exo.len() {
        match series.dates[a].cmp(&exo.dates[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                dates.push(series.dates[a]);
                data.extend_from_slice(series.features.row(a));
                data.extend_from_slice(exo.features.row(b));
                a += 1;
                b += 1;
            }
        }
    }
    if dates.is_empty() {
        return Err(Error::arg(format!(
            "no common dates between {} and exogenous table {}",
            series.ticker, exo.ticker
        )));
    }
    let matched = dates.len();
    let width = series.feature_count() + exo.feature_count();
    let mut columns = series.columns.clone();
    columns.extend(exo.columns.iter().cloned());
    let mut out = PriceSeries::new(
        series.ticker.clone(),
        dates,
        Matrix::from_vec(matched, width, data)?,
        columns,
    )?;
    out.dropped_rows = series.dropped_rows + (series.len() - matched) + (exo.len() - matched);
    Ok(out)
}
