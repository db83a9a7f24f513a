//! Trading decisions from a price trajectory and an end-of-day portfolio simulator.
//!
//! With `δᵢ = sign(cᵢ₊₁ − cᵢ)` and `Δᵢ = δᵢ₊₁ − δᵢ`, a trough at day `i + 1`
//! (falling then rising) gives `Δᵢ = +2` and a peak gives `Δᵢ = −2`. Buys are
//! placed at troughs and sells at peaks. Some descriptions of this rule state
//! the opposite sign ("Δ = −2 marks the end of a dip"), which contradicts the
//! definitions above; the local-minimum/maximum meaning is what is kept here.
//! Flat steps give `sign(0) = 0` and `Δ = ±1`, which hold.

use std::fmt;

use chrono::NaiveDate;

use crate::dataset::ScaledSeries;
use crate::error::{Error, Result};
use crate::forecast::{autoregressive_from, Predictor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Buy,
    Sell,
    Hold,
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Signal::Buy => "buy",
            Signal::Sell => "sell",
            Signal::Hold => "hold",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub day: usize,
    pub signal: Signal,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// One action per day. Days `0` and `n − 1` always hold.
pub fn decide_actions(prices: &[f64]) -> Result<Vec<Action>> {
    let n = prices.len();
    if n < 3 {
        return Err(Error::arg(format!("decide_actions needs at least 3 prices, got {n}")));
    }
    if let Some(p) = prices.iter().find(|p| !p.is_finite()) {
        return Err(Error::arg(format!("non-finite price {p}")));
    }
    let delta: Vec<i8> = prices.windows(2).map(|w| sign(w[1] - w[0])).collect();
    let mut actions: Vec<Action> = (0..n).map(|day| Action { day, signal: Signal::Hold }).collect();
    for i in 0..n - 2 {
        actions[i + 1].signal = match delta[i + 1] - delta[i] {
            2 => Signal::Buy,
            -2 => Signal::Sell,
            _ => Signal::Hold,
        };
    }
    Ok(actions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub day: usize,
    pub price: f64,
    pub signal: Signal,
    /// False when the signal could not act (buy with no cash, sell with no shares, hold).
    pub executed: bool,
    pub cash: f64,
    pub shares: f64,
    pub value: f64,
    pub growth_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeLedger {
    pub initial_cash: f64,
    pub rows: Vec<LedgerRow>,
    /// Calendar dates per row, when known.
    pub dates: Option<Vec<NaiveDate>>,
}

impl TradeLedger {
    pub fn final_value(&self) -> f64 {
        self.rows.last().map_or(self.initial_cash, |r| r.value)
    }

    pub fn final_growth(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.growth_pct)
    }

    pub fn growth_curve(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.growth_pct).collect()
    }

    pub fn trade_days(&self, signal: Signal) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.executed && r.signal == signal)
            .map(|r| r.day)
            .collect()
    }

    pub fn trade_count(&self) -> usize {
        self.rows.iter().filter(|r| r.executed).count()
    }

    /// `day_index,date,price,action,executed,cash,shares,value,growth_pct`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("day_index,date,price,action,executed,cash,shares,value,growth_pct\n");
        for (k, r) in self.rows.iter().enumerate() {
            let date = self
                .dates
                .as_ref()
                .and_then(|d| d.get(k))
                .map(|d| d.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{date},{},{},{},{},{},{},{}\n",
                r.day, r.price, r.signal, r.executed, r.cash, r.shares, r.value, r.growth_pct
            ));
        }
        out
    }
}

/// All-in buys and all-out sells at each day's close, fractional shares, no costs.
pub fn simulate_trades(prices: &[f64], actions: &[Action], initial_cash: f64) -> Result<TradeLedger> {
    if !(initial_cash > 0.0 && initial_cash.is_finite()) {
        return Err(Error::arg(format!("initial cash must be positive, got {initial_cash}")));
    }
    if let Some(p) = prices.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::arg(format!("prices must be positive, got {p}")));
    }
    let mut signals = vec![None; prices.len()];
    for a in actions {
        let slot = signals
            .get_mut(a.day)
            .ok_or_else(|| Error::arg(format!("action day {} outside 0..{}", a.day, prices.len())))?;
        if slot.is_some() {
            return Err(Error::arg(format!("more than one action for day {}", a.day)));
        }
        *slot = Some(a.signal);
    }
    let (mut cash, mut shares) = (initial_cash, 0.0);
    let mut rows = Vec::with_capacity(prices.len());
    for (day, (&price, signal)) in prices.iter().zip(signals).enumerate() {
        let signal = signal.unwrap_or(Signal::Hold);
        let executed = match signal {
            Signal::Buy if cash > 0.0 => {
                shares = cash / price;
                cash = 0.0;
                true
            }
            Signal::Sell if shares > 0.0 => {
                cash = shares * price;
                shares = 0.0;
                true
            }
            _ => false,
        };
        let value = cash + shares * price;
        rows.push(LedgerRow {
            day,
            price,
            signal,
            executed,
            cash,
            shares,
            value,
            growth_pct: 100.0 * (value / initial_cash - 1.0),
        });
    }
    Ok(TradeLedger {
        initial_cash,
        rows,
        dates: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionSource {
    /// Decisions from the model's autoregressive forecast.
    Predicted,
    /// Decisions from the actual prices (perfect foresight).
    Oracle,
}

impl fmt::Display for DecisionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionSource::Predicted => "predicted",
            DecisionSource::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for DecisionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predicted" => Ok(DecisionSource::Predicted),
            "oracle" => Ok(DecisionSource::Oracle),
            other => Err(Error::arg(format!(
                "unknown decision source {other:?} (expected predicted or oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestSummary {
    pub source: DecisionSource,
    pub final_growth_pct: f64,
    pub trade_count: usize,
    pub buy_days: Vec<usize>,
    pub sell_days: Vec<usize>,
}

impl BacktestSummary {
    pub fn from_ledger(ledger: &TradeLedger, source: DecisionSource) -> Self {
        BacktestSummary {
            source,
            final_growth_pct: ledger.final_growth(),
            trade_count: ledger.trade_count(),
            buy_days: ledger.trade_days(Signal::Buy),
            sell_days: ledger.trade_days(Signal::Sell),
        }
    }

    /// `key=value` lines.
    pub fn to_lines(&self) -> String {
        let list = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "source={}\nfinal_growth_pct={}\ntrade_count={}\nbuy_days={}\nsell_days={}\n",
            self.source,
            self.final_growth_pct,
            self.trade_count,
            list(&self.buy_days),
            list(&self.sell_days)
        )
    }
}

/// Decides over `horizon` days from row `start` and trades against actual closes.
pub fn backtest(
    model: &dyn Predictor,
    series: &ScaledSeries,
    start: usize,
    horizon: usize,
    initial_cash: f64,
    source: DecisionSource,
) -> Result<(TradeLedger, BacktestSummary)> {
    if horizon < 3 {
        return Err(Error::arg(format!("backtest horizon must be at least 3, got {horizon}")));
    }
    if start + horizon > series.len() {
        return Err(Error::arg(format!(
            "backtest needs rows {start}..{}, series {} has {}",
            start + horizon,
            series.ticker(),
            series.len()
        )));
    }
    let actual: Vec<f64> = (start..start + horizon).map(|r| series.raw.features.get(r, 0)).collect();
    let actions = match source {
        DecisionSource::Oracle => decide_actions(&actual)?,
        DecisionSource::Predicted => {
            let forecast = autoregressive_from(model, series, start, horizon)?;
            decide_actions(&forecast.prices())?
        }
    };
    let mut ledger = simulate_trades(&actual, &actions, initial_cash)?;
    ledger.dates = Some(series.raw.dates[start..start + horizon].to_vec());
    let summary = BacktestSummary::from_ledger(&ledger, source);
    Ok((ledger, summary))
}
