use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stockbot_cli::commands::{cmd_backtest, cmd_grid, cmd_predict, cmd_train, CHECKPOINT_FILE};
use stockbot_cli::{CliError, CliResult, RunConfig};
use stockbot_core::forecast::ForecastMode;
use stockbot_core::stockbot::DecisionSource;

#[derive(Parser)]
#[command(name = "stockbot", version, about = "Train LSTM price forecasters and backtest a trading bot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override a config key, e.g. --set units=32. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus loss history.
    Train(Common),
    /// Forecast from a checkpoint.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out_dir>/checkpoint.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// ground_truth, updated_truth or multiday.
        #[arg(long, default_value = "updated_truth")]
        mode: String,
    },
    /// Simulate trading on a forecast or on actual prices.
    Backtest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// predicted or oracle.
        #[arg(long, default_value = "predicted")]
        source: String,
    },
    /// Train one model per ticker group and score each on every group's holdout.
    Grid(Common),
}

fn load_config(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &c.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(d) = &c.out_dir {
        cfg.out_dir = d.clone();
    }
    Ok(cfg)
}

fn checkpoint_path(cfg: &RunConfig, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cfg.out_dir.join(CHECKPOINT_FILE))
}

fn config_err(e: stockbot_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(c) => {
            let cfg = load_config(&c)?;
            let out = cmd_train(&cfg)?;
            if let Some(last) = out.checkpoint.history.last() {
                println!("epochs={}", last.epoch);
                println!("train_loss={}", last.train_loss);
                if let Some(v) = last.val_loss {
                    println!("val_loss={v}");
                }
            }
            println!("checkpoint={}", out.checkpoint_path.display());
            println!("loss_history={}", out.loss_path.display());
        }
        Command::Predict { common, checkpoint, mode } => {
            let cfg = load_config(&common)?;
            let mode: ForecastMode = mode.parse().map_err(config_err)?;
            let out = cmd_predict(&cfg, &checkpoint_path(&cfg, &checkpoint), mode)?;
            println!("points={}", out.forecast.len());
            println!("forecast={}", out.path.display());
        }
        Command::Backtest { common, checkpoint, source } => {
            let cfg = load_config(&common)?;
            let source: DecisionSource = source.parse().map_err(config_err)?;
            let out = cmd_backtest(&cfg, &checkpoint_path(&cfg, &checkpoint), source)?;
            print!("{}", out.summary.to_lines());
            println!("ledger={}", out.ledger_path.display());
        }
        Command::Grid(c) => {
            let cfg = load_config(&c)?;
            let out = cmd_grid(&cfg)?;
            for (name, row) in out.group_names.iter().zip(0..) {
                let cells: Vec<String> = out.rmse.row(row).iter().map(|v| format!("{v:.6}")).collect();
                println!("{name}: {}", cells.join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
