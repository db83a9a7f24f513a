//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. An empty value unsets
//! an optional key. Overrides from the command line are applied after the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stockbot_core::lstm::{Architecture, NetworkSpec};
use stockbot_core::optim::{AdamConfig, LossKind, TrainConfig};

use crate::error::{CliError, CliResult};

/// A named set of tickers; the first is held out for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub tickers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub past_history: usize,
    pub forward_look: usize,
    pub stack_depth: usize,
    pub units: usize,
    pub split_ratio: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub validation_steps: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: Option<f64>,
    pub seed: u64,
    pub architecture: Architecture,
    pub loss: LossKind,
    /// Directory holding `<TICKER>.csv` files.
    pub data_dir: PathBuf,
    pub tickers: Vec<String>,
    pub exogenous: Option<PathBuf>,
    pub holdout: Option<String>,
    pub same_ticker_test_train: bool,
    pub horizon: usize,
    /// First forecast row; defaults to the first row after the training split.
    pub start: Option<usize>,
    /// Keep only this offset of each multi-day block.
    pub multiday_offset: Option<usize>,
    pub initial_cash: f64,
    pub out_dir: PathBuf,
    pub groups: Vec<Group>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        RunConfig {
            past_history: 60,
            forward_look: 1,
            stack_depth: 2,
            units: 20,
            split_ratio: 0.8,
            batch_size: 64,
            epochs: 500,
            steps_per_epoch: 200,
            validation_steps: 50,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            clip_norm: None,
            seed: 0,
            architecture: Architecture::StackedLstm,
            loss: LossKind::Plain,
            data_dir: PathBuf::from("."),
            tickers: Vec::new(),
            exogenous: None,
            holdout: None,
            same_ticker_test_train: true,
            horizon: 200,
            start: None,
            multiday_offset: None,
            initial_cash: 100.0,
            out_dir: PathBuf::from("out"),
            groups: Vec::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("bad value {value:?} for {key}: {e}")))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> CliResult<Option<T>>
where
    T::Err: Display,
{
    if value.is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn parse_groups(value: &str) -> CliResult<Vec<Group>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|g| {
            let (name, tickers) = g
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("group {g:?} must look like name:T1,T2")))?;
            Ok(Group {
                name: name.trim().to_string(),
                tickers: parse_list(tickers),
            })
        })
        .collect()
}

fn show_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {assignment:?} must look like key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "past_history" => self.past_history = parse(key, value)?,
            "forward_look" => self.forward_look = parse(key, value)?,
            "stack_depth" => self.stack_depth = parse(key, value)?,
            "units" => self.units = parse(key, value)?,
            "split_ratio" => self.split_ratio = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "steps_per_epoch" => self.steps_per_epoch = parse(key, value)?,
            "validation_steps" => self.validation_steps = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "clip_norm" => self.clip_norm = parse_opt(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "architecture" => self.architecture = parse(key, value)?,
            "loss" => self.loss = parse(key, value)?,
            "data_dir" => self.data_dir = PathBuf::from(value),
            "tickers" => self.tickers = parse_list(value),
            "exogenous" => self.exogenous = parse_opt(key, value)?,
            "holdout" => self.holdout = parse_opt(key, value)?,
            "same_ticker_test_train" => self.same_ticker_test_train = parse(key, value)?,
            "horizon" => self.horizon = parse(key, value)?,
            "start" => self.start = parse_opt(key, value)?,
            "multiday_offset" => self.multiday_offset = parse_opt(key, value)?,
            "initial_cash" => self.initial_cash = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "groups" => self.groups = parse_groups(value)?,
            other => return Err(CliError::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Every key with its current value, in a form [`RunConfig::parse`] accepts.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let groups = self
            .groups
            .iter()
            .map(|g| format!("{}:{}", g.name, g.tickers.join(",")))
            .collect::<Vec<_>>()
            .join(";");
        [
            ("past_history", self.past_history.to_string()),
            ("forward_look", self.forward_look.to_string()),
            ("stack_depth", self.stack_depth.to_string()),
            ("units", self.units.to_string()),
            ("split_ratio", self.split_ratio.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("epochs", self.epochs.to_string()),
            ("steps_per_epoch", self.steps_per_epoch.to_string()),
            ("validation_steps", self.validation_steps.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("clip_norm", show_opt(&self.clip_norm)),
            ("seed", self.seed.to_string()),
            ("architecture", self.architecture.to_string()),
            ("loss", self.loss.to_string()),
            ("data_dir", self.data_dir.display().to_string()),
            ("tickers", self.tickers.join(",")),
            ("exogenous", self.exogenous.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("holdout", show_opt(&self.holdout)),
            ("same_ticker_test_train", self.same_ticker_test_train.to_string()),
            ("horizon", self.horizon.to_string()),
            ("start", show_opt(&self.start)),
            ("multiday_offset", show_opt(&self.multiday_offset)),
            ("initial_cash", self.initial_cash.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("groups", groups),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn network_spec(&self, input_dim: usize) -> NetworkSpec {
        NetworkSpec {
            architecture: self.architecture,
            stack_depth: self.stack_depth,
            units: self.units,
            input_dim,
            past_history: self.past_history,
            forward_look: self.forward_look,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            steps_per_epoch: self.steps_per_epoch,
            validation_steps: self.validation_steps,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
            },
            clip_norm: self.clip_norm,
            seed: self.seed,
        }
    }

    pub fn ticker_path(&self, ticker: &str) -> PathBuf {
        self.data_dir.join(format!("{ticker}.csv"))
    }

    /// Checks values and input paths before any work starts.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio));
        }
        if !(self.initial_cash > 0.0 && self.initial_cash.is_finite()) {
            return bad(format!("initial_cash must be positive, got {}", self.initial_cash));
        }
        self.network_spec(1)
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.train_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        for t in self.tickers.iter().chain(self.groups.iter().flat_map(|g| &g.tickers)) {
            let p = self.ticker_path(t);
            if !p.is_file() {
                return bad(format!("data file for ticker {t} not found at {}", p.display()));
            }
        }
        if let Some(p) = &self.exogenous {
            if !p.is_file() {
                return bad(format!("exogenous file not found at {}", p.display()));
            }
        }
        if let Some(h) = &self.holdout {
            if !self.tickers.contains(h) {
                return bad(format!("holdout ticker {h} is not listed in tickers"));
            }
        }
        Ok(())
    }
}
