//! Versioned JSON model checkpoints.
//!
//! Floats are written in shortest round-trip form, so a loaded network
//! predicts bit-for-bit like the saved one.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stockbot_core::dataset::Scaler;
use stockbot_core::lstm::{Architecture, Network, NetworkParams, NetworkSpec};
use stockbot_core::ndcore::{Matrix, Parameters};
use stockbot_core::optim::{EpochLoss, LossHistory};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SpecDoc {
    architecture: String,
    stack_depth: usize,
    units: usize,
    input_dim: usize,
    past_history: usize,
    forward_look: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorDoc {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScalerDoc {
    ticker: String,
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LossDoc {
    epoch: usize,
    train_loss: f64,
    val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointDoc {
    format_version: i64,
    spec: SpecDoc,
    tensors: Vec<TensorDoc>,
    scalers: Vec<ScalerDoc>,
    seed: u64,
    config: BTreeMap<String, String>,
    loss_history: Vec<LossDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    /// Per-ticker scalers used to normalize the training data.
    pub scalers: Vec<(String, Scaler)>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub history: LossHistory,
}

impl Checkpoint {
    pub fn scaler_for(&self, ticker: &str) -> Option<&Scaler> {
        self.scalers.iter().find(|(t, _)| t == ticker).map(|(_, s)| s)
    }

    pub fn to_json(&self) -> String {
        let spec = &self.network.spec;
        let doc = CheckpointDoc {
            format_version: FORMAT_VERSION,
            spec: SpecDoc {
                architecture: spec.architecture.to_string(),
                stack_depth: spec.stack_depth,
                units: spec.units,
                input_dim: spec.input_dim,
                past_history: spec.past_history,
                forward_look: spec.forward_look,
            },
            tensors: self
                .network
                .params
                .tensor_names()
                .into_iter()
                .zip(self.network.params.tensors())
                .map(|(name, t)| TensorDoc {
                    name,
                    rows: t.rows(),
                    cols: t.cols(),
                    data: t.data().to_vec(),
                })
                .collect(),
            scalers: self
                .scalers
                .iter()
                .map(|(t, s)| ScalerDoc {
                    ticker: t.clone(),
                    min: s.min.clone(),
                    max: s.max.clone(),
                })
                .collect(),
            seed: self.seed,
            config: self.config.clone(),
            loss_history: self
                .history
                .epochs
                .iter()
                .map(|e| LossDoc {
                    epoch: e.epoch,
                    train_loss: e.train_loss,
                    val_loss: e.val_loss,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            CliError::Format(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        match value.get("format_version").and_then(|v| v.as_i64()) {
            Some(FORMAT_VERSION) => {}
            Some(found) => {
                return Err(CliError::Version {
                    found,
                    expected: FORMAT_VERSION,
                })
            }
            None => return Err(CliError::Format("missing integer field format_version".into())),
        }
        let doc: CheckpointDoc =
            serde_json::from_value(value).map_err(|e| CliError::Format(e.to_string()))?;
        let architecture: Architecture = doc
            .spec
            .architecture
            .parse()
            .map_err(|e| CliError::Format(format!("spec.architecture: {e}")))?;
        let spec = NetworkSpec {
            architecture,
            stack_depth: doc.spec.stack_depth,
            units: doc.spec.units,
            input_dim: doc.spec.input_dim,
            past_history: doc.spec.past_history,
            forward_look: doc.spec.forward_look,
        };
        spec.validate()
            .map_err(|e| CliError::Format(format!("spec: {e}")))?;
        let mut params = NetworkParams::zeros(&spec);
        let names = params.tensor_names();
        if names.len() != doc.tensors.len() {
            return Err(CliError::Format(format!(
                "expected {} tensors, found {}",
                names.len(),
                doc.tensors.len()
            )));
        }
        for ((name, slot), t) in names.iter().zip(params.tensors_mut()).zip(doc.tensors) {
            if &t.name != name {
                return Err(CliError::Format(format!("tensor {:?} found where {name:?} expected", t.name)));
            }
            if (t.rows, t.cols) != slot.shape() {
                return Err(CliError::Format(format!(
                    "tensor {name}: shape {}x{} but spec requires {}x{}",
                    t.rows,
                    t.cols,
                    slot.rows(),
                    slot.cols()
                )));
            }
            *slot = Matrix::from_vec(t.rows, t.cols, t.data)
                .map_err(|e| CliError::Format(format!("tensor {name}: {e}")))?;
        }
        let network =
            Network::from_parts(spec, params).map_err(|e| CliError::Format(e.to_string()))?;
        let scalers = doc
            .scalers
            .into_iter()
            .map(|s| {
                Scaler::new(s.min, s.max)
                    .map(|sc| (s.ticker.clone(), sc))
                    .map_err(|e| CliError::Format(format!("scaler {}: {e}", s.ticker)))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Checkpoint {
            network,
            scalers,
            seed: doc.seed,
            config: doc.config,
            history: LossHistory {
                epochs: doc
                    .loss_history
                    .into_iter()
                    .map(|e| EpochLoss {
                        epoch: e.epoch,
                        train_loss: e.train_loss,
                        val_loss: e.val_loss,
                    })
                    .collect(),
            },
        })
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> CliResult<()> {
    std::fs::write(path, ckpt.to_json()).map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Checkpoint::from_json(&text)
}
