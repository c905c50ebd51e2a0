use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, AdamState, Network};
use crate::dataset::{invert_minmax, NormParams, WindowedDataset};
use crate::error::{Error, Result};
use crate::signals::PRICE_HIGH_COLUMN;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping. A value of
    /// `max_epochs` or more disables early stopping.
    pub patience: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Optional global gradient-norm clip.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            learning_rate: 0.001,
            max_epochs: 20,
            patience: 2,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!("learning rate {}", self.learning_rate)));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidArgument("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Mean squared error over the epoch's mini-batches, measured before each update.
    pub train_mse: f64,
    pub val_mse: f64,
}

/// Tracks the best validation loss and decides when to stop.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Records the validation loss of 1-based `epoch`; returns `true` once
    /// training should stop.
    pub fn observe(&mut self, epoch: usize, val_mse: f64) -> bool {
        if val_mse < self.best {
            self.best = val_mse;
            self.best_epoch = epoch;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= self.patience
    }

    pub fn improved_at(&self, epoch: usize) -> bool {
        self.best_epoch == epoch
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

/// A trained network plus everything needed to predict in USD.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub network: Network,
    pub norm: NormParams,
    pub history: Vec<EpochStats>,
    /// 1-based epoch whose parameters were restored.
    pub best_epoch: usize,
    pub config: TrainConfig,
    pub k: usize,
    pub j: usize,
    pub feature_names: Vec<String>,
    /// Free-form provenance (signal families, vocabulary, calendar end, ...).
    pub meta: BTreeMap<String, String>,
}

fn mse(net: &Network, data: &WindowedDataset) -> Result<f64> {
    let mut acc = 0.0;
    for s in &data.samples {
        let e = net.predict_one(&s.input)? - s.target;
        acc += e * e;
    }
    Ok(acc / data.len() as f64)
}

/// Mini-batch ADAM on mean squared error with early stopping on `val`.
/// The returned model carries the parameters of the best validation epoch.
pub fn train(
    mut net: Network,
    fit: &WindowedDataset,
    val: &WindowedDataset,
    norm: NormParams,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    if fit.is_empty() || val.is_empty() {
        return Err(Error::Empty("training and validation sets must be nonempty".into()));
    }
    let width = fit.k * net.input_dim();
    if fit.features() != net.input_dim()
        || val.features() != net.input_dim()
        || val.k != fit.k
        || fit.samples.iter().chain(&val.samples).any(|s| s.input.len() != width)
    {
        return Err(Error::Shape("datasets do not match the network input".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..fit.len()).collect();
    let mut grads = vec![0.0; net.params().len()];
    let mut adam = AdamState::new(grads.len());
    let mut best_params = net.params().to_vec();
    let mut monitor = EarlyStopping::new(config.patience);
    let mut history = Vec::new();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let s = &fit.samples[i];
                let (pred, cache) = net.forward(&s.input)?;
                let err = pred - s.target;
                loss_sum += err * err;
                net.backward(&cache, scale * err, &mut grads)?;
            }
            if let Some(max_norm) = config.clip_norm {
                let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > max_norm {
                    let k = max_norm / norm;
                    grads.iter_mut().for_each(|g| *g *= k);
                }
            }
            adam_step(
                net.params_mut(),
                &grads,
                &mut adam,
                config.learning_rate,
                config.beta1,
                config.beta2,
                config.eps,
            )?;
        }
        let val_mse = mse(&net, val)?;
        if !val_mse.is_finite() {
            return Err(Error::Divergence { epoch, val_mse });
        }
        let stats = EpochStats {
            train_mse: loss_sum / fit.len() as f64,
            val_mse,
        };
        log::debug!("epoch {epoch}: train {:.6e} val {:.6e}", stats.train_mse, stats.val_mse);
        history.push(stats);
        let stop = monitor.observe(epoch, val_mse);
        if monitor.improved_at(epoch) {
            best_params.copy_from_slice(net.params());
        }
        if stop {
            break;
        }
    }
    net.params_mut().copy_from_slice(&best_params);
    Ok(TrainedModel {
        network: net,
        norm,
        history,
        best_epoch: monitor.best_epoch(),
        config: config.clone(),
        k: fit.k,
        j: fit.j,
        feature_names: fit.feature_names.clone(),
        meta: BTreeMap::new(),
    })
}

/// Raw network outputs (normalized price units) for each window.
pub fn predict_normalized(model: &TrainedModel, windows: &[&[f64]]) -> Result<Vec<f64>> {
    let width = model.k * model.network.input_dim();
    windows
        .iter()
        .map(|w| {
            if w.len() != width {
                return Err(Error::Shape(format!(
                    "window of {} values, model expects {width}",
                    w.len()
                )));
            }
            model.network.predict_one(w)
        })
        .collect()
}

/// Predictions in USD: network outputs mapped back through the price-high
/// normalization.
pub fn predict(model: &TrainedModel, windows: &[&[f64]]) -> Result<Vec<f64>> {
    predict_normalized(model, windows)?
        .into_iter()
        .map(|v| invert_minmax(v, PRICE_HIGH_COLUMN, &model.norm))
        .collect()
}
