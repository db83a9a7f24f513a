//! The `train`, `predict`, `backtest` and `grid` commands.
//!
//! Every file a command writes goes under `config.out_dir`.

use std::path::{Path, PathBuf};

use stockbot_core::dataset::{
    attach_exogenous, build_multistock, correlation_matrix, make_windows, parse_exogenous_csv,
    parse_ohlcv_csv, split_train_dev, train_window_count, training_rows, window_count, PriceSeries,
    ScaledSeries,
};
use stockbot_core::forecast::{
    autoregressive_from, multiday_rollout, rmse_grid, teacher_forced_rollout, BlockRetention,
    EvalTarget, ForecastMode, ForecastSeries, Predictor,
};
use stockbot_core::lstm::Network;
use stockbot_core::ndcore::{Matrix, Rng};
use stockbot_core::optim::{train, LossHistory};
use stockbot_core::stockbot::{backtest, BacktestSummary, DecisionSource, TradeLedger};

use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const LOSS_FILE: &str = "loss_history.csv";

fn write_out(cfg: &RunConfig, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    let path = cfg.out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Reads `<data_dir>/<ticker>.csv`, joined with the exogenous table if configured.
pub fn load_series(cfg: &RunConfig, ticker: &str) -> CliResult<PriceSeries> {
    let path = cfg.ticker_path(ticker);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let series = parse_ohlcv_csv(&text, ticker).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    match &cfg.exogenous {
        None => Ok(series),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("exogenous");
            let exo = parse_exogenous_csv(&text, name).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            Ok(attach_exogenous(&series, &exo)?)
        }
    }
}

/// Scales a series with a min-max scaler fitted on its training rows.
pub fn scale_for_training(cfg: &RunConfig, raw: PriceSeries) -> CliResult<ScaledSeries> {
    let rows = training_rows(raw.len(), cfg.past_history, cfg.forward_look, cfg.split_ratio);
    Ok(ScaledSeries::fit(raw, rows)?)
}

/// First row after the chronological training split of a series of length `len`.
pub fn default_start(cfg: &RunConfig, len: usize) -> usize {
    let windows = window_count(len, cfg.past_history, cfg.forward_look);
    train_window_count(windows, cfg.split_ratio) + cfg.past_history
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub checkpoint_path: PathBuf,
    pub loss_path: PathBuf,
}

fn fit_model(
    cfg: &RunConfig,
    tickers: &[String],
    same_ticker_test_train: bool,
    holdout: Option<&str>,
) -> CliResult<Checkpoint> {
    if tickers.is_empty() {
        return Err(CliError::Config("no tickers configured".into()));
    }
    let scaled = tickers
        .iter()
        .map(|t| scale_for_training(cfg, load_series(cfg, t)?))
        .collect::<CliResult<Vec<_>>>()?;
    let (train_set, dev_set) = if scaled.len() == 1 {
        let ds = make_windows(&scaled[0].scaled, cfg.past_history, cfg.forward_look)?;
        split_train_dev(&ds, cfg.split_ratio)?
    } else {
        let list: Vec<PriceSeries> = scaled.iter().map(|s| s.scaled.clone()).collect();
        build_multistock(
            &list,
            cfg.past_history,
            cfg.forward_look,
            cfg.split_ratio,
            same_ticker_test_train,
            holdout,
        )?
    };
    let spec = cfg.network_spec(scaled[0].scaled.feature_count());
    let mut network = Network::new(spec, &mut Rng::new(cfg.seed))?;
    let history = train(&mut network, &train_set, &dev_set, &cfg.train_config(), cfg.loss)?;
    Ok(Checkpoint {
        network,
        scalers: scaled.into_iter().map(|s| (s.ticker().to_string(), s.scaler)).collect(),
        seed: cfg.seed,
        config: cfg.entries(),
        history,
    })
}

/// Trains on the configured tickers; writes the checkpoint and the loss CSV.
pub fn cmd_train(cfg: &RunConfig) -> CliResult<TrainOutcome> {
    cfg.validate()?;
    let checkpoint = fit_model(cfg, &cfg.tickers, cfg.same_ticker_test_train, cfg.holdout.as_deref())?;
    let loss_path = write_out(cfg, LOSS_FILE, &checkpoint.history.to_csv())?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    let checkpoint_path = cfg.out_dir.join(CHECKPOINT_FILE);
    save_checkpoint(&checkpoint_path, &checkpoint)?;
    Ok(TrainOutcome {
        checkpoint,
        checkpoint_path,
        loss_path,
    })
}

/// The series commands evaluate on: the holdout if set, else the first ticker.
pub fn target_ticker(cfg: &RunConfig) -> CliResult<&str> {
    cfg.holdout
        .as_deref()
        .or(cfg.tickers.first().map(String::as_str))
        .ok_or_else(|| CliError::Config("no tickers configured".into()))
}

/// Loads and scales the evaluation series with the checkpoint's scaler when it has one.
pub fn evaluation_series(cfg: &RunConfig, ckpt: &Checkpoint) -> CliResult<ScaledSeries> {
    let ticker = target_ticker(cfg)?;
    let raw = load_series(cfg, ticker)?;
    let expected = ckpt.network.input_dim();
    if raw.feature_count() != expected {
        return Err(CliError::Data(format!(
            "checkpoint expects {expected} input features, {ticker} data has {}",
            raw.feature_count()
        )));
    }
    match ckpt.scaler_for(ticker) {
        Some(s) => Ok(ScaledSeries::with_scaler(raw, s.clone())?),
        None => scale_for_training(cfg, raw),
    }
}

#[derive(Debug, Clone)]
pub struct PredictOutcome {
    pub forecast: ForecastSeries,
    pub csv: String,
    pub path: PathBuf,
}

pub fn run_forecast(
    cfg: &RunConfig,
    model: &dyn Predictor,
    series: &ScaledSeries,
    mode: ForecastMode,
) -> CliResult<ForecastSeries> {
    let start = cfg.start.unwrap_or_else(|| default_start(cfg, series.len()));
    let f = match mode {
        ForecastMode::GroundTruth => teacher_forced_rollout(model, series, start, cfg.horizon)?,
        ForecastMode::UpdatedTruth => autoregressive_from(model, series, start, cfg.horizon)?,
        ForecastMode::Multiday => {
            let retention = cfg.multiday_offset.map_or(BlockRetention::Full, BlockRetention::Offset);
            multiday_rollout(model, series, start, cfg.horizon, retention)?
        }
    };
    Ok(f.with_model_id(series.ticker()))
}

/// Writes `forecast_<mode>.csv`.
pub fn cmd_predict(cfg: &RunConfig, checkpoint: &Path, mode: ForecastMode) -> CliResult<PredictOutcome> {
    cfg.validate()?;
    let ckpt = load_checkpoint(checkpoint)?;
    let series = evaluation_series(cfg, &ckpt)?;
    let forecast = run_forecast(cfg, &ckpt.network, &series, mode)?;
    let csv = forecast.to_csv(Some(&series));
    let path = write_out(cfg, &format!("forecast_{mode}.csv"), &csv)?;
    Ok(PredictOutcome { forecast, csv, path })
}

#[derive(Debug, Clone)]
pub struct BacktestOutcome {
    pub ledger: TradeLedger,
    pub summary: BacktestSummary,
    pub ledger_path: PathBuf,
}

/// Writes `ledger_<source>.csv` and `summary_<source>.txt`.
pub fn cmd_backtest(cfg: &RunConfig, checkpoint: &Path, source: DecisionSource) -> CliResult<BacktestOutcome> {
    cfg.validate()?;
    let ckpt = load_checkpoint(checkpoint)?;
    let series = evaluation_series(cfg, &ckpt)?;
    let start = cfg.start.unwrap_or_else(|| default_start(cfg, series.len()));
    let (ledger, summary) = backtest(&ckpt.network, &series, start, cfg.horizon, cfg.initial_cash, source)?;
    let ledger_path = write_out(cfg, &format!("ledger_{source}.csv"), &ledger.to_csv())?;
    write_out(cfg, &format!("summary_{source}.txt"), &summary.to_lines())?;
    Ok(BacktestOutcome {
        ledger,
        summary,
        ledger_path,
    })
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub group_names: Vec<String>,
    pub holdouts: Vec<String>,
    pub correlation: Matrix,
    pub rmse: Matrix,
    pub histories: Vec<LossHistory>,
}

fn matrix_csv(corner: &str, row_labels: &[String], col_labels: &[String], m: &Matrix) -> String {
    let mut out = format!("{corner},{}\n", col_labels.join(","));
    for (i, label) in row_labels.iter().enumerate() {
        let cells: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{label},{}\n", cells.join(",")));
    }
    out
}

/// Trains one model per group with that group's first ticker held out, then
/// scores every model on every holdout. Writes `correlation.csv` and `rmse_grid.csv`.
pub fn cmd_grid(cfg: &RunConfig) -> CliResult<GridOutcome> {
    cfg.validate()?;
    if cfg.groups.is_empty() {
        return Err(CliError::Config("grid needs at least one group (groups = name:T1,T2;...)".into()));
    }
    for g in &cfg.groups {
        if g.tickers.len() < 2 {
            return Err(CliError::Config(format!(
                "group {} needs a holdout ticker and at least one training ticker",
                g.name
            )));
        }
    }
    let mut models = Vec::new();
    let mut targets = Vec::new();
    let mut histories = Vec::new();
    for g in &cfg.groups {
        let holdout = &g.tickers[0];
        let ckpt = fit_model(cfg, &g.tickers, false, Some(holdout))?;
        let scaler = ckpt
            .scaler_for(holdout)
            .cloned()
            .ok_or_else(|| CliError::Internal(format!("no scaler recorded for {holdout}")))?;
        let series = ScaledSeries::with_scaler(load_series(cfg, holdout)?, scaler)?;
        let start = cfg.start.unwrap_or_else(|| default_start(cfg, series.len()));
        let horizon = cfg.horizon.min(series.len().saturating_sub(start));
        targets.push(EvalTarget { series, start, horizon });
        histories.push(ckpt.history);
        models.push(ckpt.network);
    }
    let refs: Vec<&dyn Predictor> = models.iter().map(|m| m as &dyn Predictor).collect();
    let rmse = rmse_grid(&refs, &targets)?;
    let raw: Vec<PriceSeries> = targets.iter().map(|t| t.series.raw.clone()).collect();
    let correlation = correlation_matrix(&raw)?.matrix;

    let group_names: Vec<String> = cfg.groups.iter().map(|g| g.name.clone()).collect();
    let holdouts: Vec<String> = cfg.groups.iter().map(|g| g.tickers[0].clone()).collect();
    write_out(cfg, "correlation.csv", &matrix_csv("ticker", &holdouts, &holdouts, &correlation))?;
    write_out(cfg, "rmse_grid.csv", &matrix_csv("model", &group_names, &holdouts, &rmse))?;
    Ok(GridOutcome {
        group_names,
        holdouts,
        correlation,
        rmse,
        histories,
    })
}
