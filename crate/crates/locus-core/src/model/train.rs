use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{decode_tag_ids, TaskKind};

use super::encode::{Gold, TrainExample};
use super::matrix::snap_f32;
use super::net::{loss_and_grads_impl, Model, TokenScorer};

/// Anything the SGD loop can train: exposes a flat, indexable view of its
/// trainable parameters plus batched loss/gradient evaluation. The full
/// model and the adapter-wrapped model both implement it, so full
/// fine-tuning and adapter training share one loop.
pub trait Trainable {
    fn trainable_len(&self) -> usize;
    fn get_param(&self, idx: usize) -> f64;
    /// Raw write, no rounding; SGD rounds through [`sgd_step`](Self::sgd_step).
    fn set_param(&mut self, idx: usize, value: f64);
    /// Mean loss and flat gradients over a batch, aligned with the
    /// parameter indexing.
    fn loss_and_grads(&self, batch: &[&TrainExample]) -> (f64, Vec<f64>);

    fn sgd_step(&mut self, grads: &[f64], learning_rate: f64) {
        debug_assert_eq!(grads.len(), self.trainable_len());
        for (idx, g) in grads.iter().enumerate() {
            let updated = self.get_param(idx) - learning_rate * g;
            self.set_param(idx, snap_f32(updated));
        }
    }

    fn snapshot(&self) -> Vec<f64> {
        (0..self.trainable_len()).map(|i| self.get_param(i)).collect()
    }

    fn restore(&mut self, snapshot: &[f64]) {
        debug_assert_eq!(snapshot.len(), self.trainable_len());
        for (idx, &v) in snapshot.iter().enumerate() {
            self.set_param(idx, v);
        }
    }
}

impl Trainable for Model {
    fn trainable_len(&self) -> usize {
        self.config().param_count()
    }

    fn get_param(&self, idx: usize) -> f64 {
        let (section, offset) = self.locate(idx);
        match section {
            0 => self.embedding().values()[offset],
            1 => self.hidden_w().values()[offset],
            2 => self.hidden_b()[offset],
            3 => self.out_w().values()[offset],
            _ => self.out_b()[offset],
        }
    }

    fn set_param(&mut self, idx: usize, value: f64) {
        let (section, offset) = self.locate(idx);
        match section {
            0 => self.embedding_mut().values_mut()[offset] = value,
            1 => self.hidden_w_mut().values_mut()[offset] = value,
            2 => self.hidden_b_mut()[offset] = value,
            3 => self.out_w_mut().values_mut()[offset] = value,
            _ => self.out_b_mut()[offset] = value,
        }
    }

    fn loss_and_grads(&self, batch: &[&TrainExample]) -> (f64, Vec<f64>) {
        let (loss, grads, _) = loss_and_grads_impl(self, None, batch, true, false);
        (loss, grads.expect("base gradients requested").flatten())
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub dev_fraction: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-5,
            epochs: 40,
            patience: 5,
            batch_size: 32,
            dev_fraction: 0.1,
            rng_seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(String::from(
                "learning_rate must be positive and finite",
            )));
        }
        if self.patience == 0 {
            return Err(TrainError::InvalidConfig(String::from("patience must be at least 1")));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig(String::from("batch_size must be at least 1")));
        }
        if !(self.dev_fraction > 0.0 && self.dev_fraction < 1.0) {
            return Err(TrainError::InvalidConfig(String::from(
                "dev_fraction must be in (0, 1)",
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrainError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_metric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EarlyStop,
    MaxEpochs,
}

/// Per-epoch log of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stop_reason: StopReason,
}

impl TrainHistory {
    pub fn best_metric(&self) -> Option<f64> {
        self.best_epoch.and_then(|e| {
            self.epochs
                .iter()
                .find(|r| r.epoch == e)
                .map(|r| r.dev_metric)
        })
    }
}

/// Mini-batch SGD with early stopping on a held-out dev split.
///
/// The dev split is a seeded shuffle's prefix; `eval_fn` scores the model on
/// it after every epoch (higher is better). When the metric fails to improve
/// for `patience` consecutive epochs the loop stops and the best epoch's
/// weights are restored. Fully deterministic for a fixed seed.
pub fn train<M, F>(
    model: &mut M,
    data: &[TrainExample],
    cfg: &TrainConfig,
    eval_fn: F,
) -> Result<TrainHistory, TrainError>
where
    M: Trainable,
    F: Fn(&M, &[&TrainExample]) -> f64,
{
    cfg.validate()?;
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut indices: Vec<usize> = (0..data.len()).collect();
    indices.shuffle(&mut rng);

    let dev_len = if data.len() >= 2 {
        let want = libm::round(cfg.dev_fraction * data.len() as f64) as usize;
        want.clamp(1, data.len() - 1)
    } else {
        0
    };
    let (dev_idx, train_idx) = indices.split_at(dev_len);
    let dev_refs: Vec<&TrainExample> = if dev_idx.is_empty() {
        // Degenerate single-example dataset: score on what we have.
        train_idx.iter().map(|&i| &data[i]).collect()
    } else {
        dev_idx.iter().map(|&i| &data[i]).collect()
    };
    let mut train_order: Vec<usize> = train_idx.to_vec();

    let mut history = TrainHistory {
        epochs: Vec::new(),
        best_epoch: None,
        stop_reason: StopReason::MaxEpochs,
    };
    let mut best_metric = f64::NEG_INFINITY;
    let mut best_params: Option<Vec<f64>> = None;
    let mut stale = 0usize;

    for epoch in 1..=cfg.epochs {
        train_order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in train_order.chunks(cfg.batch_size) {
            let batch: Vec<&TrainExample> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grads) = model.loss_and_grads(&batch);
            model.sgd_step(&grads, cfg.learning_rate);
            loss_sum += loss;
            batches += 1;
        }
        let train_loss = if batches > 0 { loss_sum / batches as f64 } else { 0.0 };
        let dev_metric = eval_fn(model, &dev_refs);
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            dev_metric,
        });

        if dev_metric > best_metric {
            best_metric = dev_metric;
            history.best_epoch = Some(epoch);
            best_params = Some(model.snapshot());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                history.stop_reason = StopReason::EarlyStop;
                break;
            }
        }
    }

    if let Some(params) = best_params {
        model.restore(&params);
    }
    Ok(history)
}

/// Micro span-level F1 over dense tag sequences, used as the NER dev metric.
pub fn tag_span_f1(pred: &[Vec<usize>], gold: &[Vec<usize>]) -> f64 {
    let mut matched = 0usize;
    let mut predicted = 0usize;
    let mut gold_total = 0usize;
    for (p, g) in pred.iter().zip(gold.iter()) {
        let p_spans = decode_tag_ids(p);
        let g_spans = decode_tag_ids(g);
        predicted += p_spans.len();
        gold_total += g_spans.len();
        let mut used = alloc::vec![false; g_spans.len()];
        for span in &p_spans {
            if let Some(pos) = (0..g_spans.len()).find(|&i| !used[i] && g_spans[i] == *span) {
                used[pos] = true;
                matched += 1;
            }
        }
    }
    if predicted == 0 || gold_total == 0 {
        return if predicted == 0 && gold_total == 0 { 1.0 } else { 0.0 };
    }
    let precision = matched as f64 / predicted as f64;
    let recall = matched as f64 / gold_total as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Dev metric matching what evaluation reports: span F1 for NER, accuracy
/// for TC. Suitable as the `eval_fn` argument of [`train`].
pub fn standard_dev_metric<M: TokenScorer>(model: &M, batch: &[&TrainExample]) -> f64 {
    match model.model_config().task {
        TaskKind::Ner => {
            let mut pred = Vec::with_capacity(batch.len());
            let mut gold = Vec::with_capacity(batch.len());
            for ex in batch {
                let Gold::Tags(tags) = &ex.gold else { continue };
                let logits = model.token_logits(&ex.buckets);
                pred.push(logits.iter().map(|z| argmax(z)).collect::<Vec<_>>());
                gold.push(tags.clone());
            }
            tag_span_f1(&pred, &gold)
        }
        TaskKind::Tc => {
            let mut correct = 0usize;
            let mut total = 0usize;
            for ex in batch {
                let Gold::Class(gold) = &ex.gold else { continue };
                let Some(logits) = model.pooled_logits(&ex.buckets) else { continue };
                total += 1;
                if argmax(&logits) == *gold {
                    correct += 1;
                }
            }
            if total == 0 {
                0.0
            } else {
                correct as f64 / total as f64
            }
        }
    }
}
