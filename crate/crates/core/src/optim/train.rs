use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::{make_weights, mse_loss, weighted_mse_loss, LossKind, LossOutput, WeightVector};
use crate::dataset::WindowedDataset;
use crate::error::{Error, Result};
use crate::lstm::{Architecture, DecoderInput, Gradients, Network, NetworkParams};
use crate::ndcore::{Parameters, Rng};

/// Minibatch schedule and optimizer settings. Defaults: batch 64, 500 epochs
/// of 200 steps, 50 validation batches per epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub validation_steps: usize,
    pub adam: AdamConfig,
    /// Rescale gradients whose global L2 norm exceeds this.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            epochs: 500,
            steps_per_epoch: 200,
            validation_steps: 50,
            adam: AdamConfig::default(),
            clip_norm: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("steps_per_epoch", self.steps_per_epoch),
            ("validation_steps", self.validation_steps),
        ] {
            if v == 0 {
                return Err(Error::arg(format!("{name} must be at least 1")));
            }
        }
        if self.clip_norm.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::arg("clip_norm must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean of the per-step batch losses.
    pub train_loss: f64,
    /// Mean over validation batches; `None` without a dev set.
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossHistory {
    pub epochs: Vec<EpochLoss>,
}

impl LossHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn last(&self) -> Option<&EpochLoss> {
        self.epochs.last()
    }

    /// `epoch,train_loss,val_loss`; `val_loss` is empty when absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            let val = e.val_loss.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, val));
        }
        out
    }
}

fn loss_for(kind: LossKind, weights: &WeightVector, pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<LossOutput> {
    match kind {
        LossKind::Plain => mse_loss(pred, truth),
        LossKind::Weighted => weighted_mse_loss(pred, truth, weights),
    }
}

/// Loss and summed parameter gradient over the windows at `indices`.
///
/// Encoder-decoders run teacher-forced on the window targets. Gradients are
/// accumulated in `indices` order.
pub fn batch_gradient(
    net: &Network,
    data: &WindowedDataset,
    indices: &[usize],
    kind: LossKind,
) -> Result<(f64, Gradients)> {
    let weights = make_weights(net.spec.forward_look);
    let mut grads = NetworkParams::zeros(&net.spec);
    let truth: Vec<Vec<f64>> = indices.iter().map(|&i| data.targets[i].clone()).collect();

    match net.spec.architecture {
        Architecture::StackedLstm => {
            let mut preds = Vec::with_capacity(indices.len());
            let mut caches = Vec::with_capacity(indices.len());
            for &i in indices {
                let (p, c) = net.forward_window(&data.inputs[i])?;
                preds.push(p);
                caches.push(c);
            }
            let out = loss_for(kind, &weights, &preds, &truth)?;
            for (cache, g) in caches.iter().zip(&out.grads) {
                net.backward_window_into(cache, g, &mut grads)?;
            }
            Ok((out.loss, grads))
        }
        Architecture::EncoderDecoder => {
            let mut preds = Vec::with_capacity(indices.len());
            let mut caches = Vec::with_capacity(indices.len());
            for (&i, t) in indices.iter().zip(&truth) {
                let (p, c) = net.encdec_forward(&data.inputs[i], DecoderInput::TeacherForced(t))?;
                preds.push(p);
                caches.push(c);
            }
            let out = loss_for(kind, &weights, &preds, &truth)?;
            for (cache, g) in caches.iter().zip(&out.grads) {
                net.encdec_backward_into(cache, g, &mut grads)?;
            }
            Ok((out.loss, grads))
        }
    }
}

fn batch_loss(net: &Network, data: &WindowedDataset, indices: &[usize], kind: LossKind) -> Result<f64> {
    let weights = make_weights(net.spec.forward_look);
    let mut preds = Vec::with_capacity(indices.len());
    let mut truth = Vec::with_capacity(indices.len());
    for &i in indices {
        let t = &data.targets[i];
        let p = match net.spec.architecture {
            Architecture::StackedLstm => net.forward_window(&data.inputs[i])?.0,
            Architecture::EncoderDecoder => {
                net.encdec_forward(&data.inputs[i], DecoderInput::TeacherForced(t))?.0
            }
        };
        preds.push(p);
        truth.push(t.clone());
    }
    Ok(loss_for(kind, &weights, &preds, &truth)?.loss)
}

fn sample(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|_| rng.below(n)).collect()
}

fn check_dataset(net: &Network, data: &WindowedDataset, what: &str) -> Result<()> {
    if data.past_history != net.spec.past_history || data.forward_look != net.spec.forward_look {
        return Err(Error::arg(format!(
            "{what} windows are {}→{}, network expects {}→{}",
            data.past_history, data.forward_look, net.spec.past_history, net.spec.forward_look
        )));
    }
    if let Some(f) = data.feature_count() {
        if f != net.spec.input_dim {
            return Err(Error::arg(format!(
                "{what} windows have {f} features, network expects {}",
                net.spec.input_dim
            )));
        }
    }
    Ok(())
}

/// Minibatch Adam training.
///
/// Each step samples `batch_size` training windows with replacement from a
/// generator seeded with `config.seed`; after every epoch the same generator
/// draws `validation_steps` dev batches. Validation uses `kind` as well.
pub fn train(
    net: &mut Network,
    train_set: &WindowedDataset,
    dev_set: &WindowedDataset,
    config: &TrainConfig,
    kind: LossKind,
) -> Result<LossHistory> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::arg("training set is empty"));
    }
    if config.batch_size > train_set.len() {
        return Err(Error::arg(format!(
            "batch_size {} exceeds training set size {}",
            config.batch_size,
            train_set.len()
        )));
    }
    check_dataset(net, train_set, "training")?;
    check_dataset(net, dev_set, "dev")?;

    let mut rng = Rng::new(config.seed);
    let mut adam = AdamState::new(&net.params, config.adam);
    let mut history = LossHistory::default();

    for epoch in 1..=config.epochs {
        let mut total = 0.0;
        for _ in 0..config.steps_per_epoch {
            let idx = sample(&mut rng, train_set.len(), config.batch_size);
            let (loss, mut grads) = batch_gradient(net, train_set, &idx, kind)?;
            if !loss.is_finite() {
                return Err(Error::State(format!("non-finite training loss in epoch {epoch}")));
            }
            if let Some(clip) = config.clip_norm {
                let norm = grads.l2_norm();
                if norm > clip {
                    let scale = clip / norm;
                    for t in grads.tensors_mut() {
                        t.data_mut().iter_mut().for_each(|v| *v *= scale);
                    }
                }
            }
            adam_step(&mut net.params, &grads, &mut adam)?;
            total += loss;
        }

        let val_loss = if dev_set.is_empty() {
            None
        } else {
            let mut v = 0.0;
            for _ in 0..config.validation_steps {
                let idx = sample(&mut rng, dev_set.len(), config.batch_size);
                v += batch_loss(net, dev_set, &idx, kind)?;
            }
            let v = v / config.validation_steps as f64;
            if !v.is_finite() {
                return Err(Error::State(format!("non-finite validation loss in epoch {epoch}")));
            }
            Some(v)
        };
        history.epochs.push(EpochLoss {
            epoch,
            train_loss: total / config.steps_per_epoch as f64,
            val_loss,
        });
    }
    Ok(history)
}
