use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, TaskKind};
use crate::hashing::seed_of;
use crate::lora::{count_params_adapted, wrap_lora, LoraConfig};
use crate::model::{
    encode_dataset, init_model, predict, standard_dev_metric, train, ModelConfig, TokenScorer,
    TrainConfig,
};

use super::metrics::{entity_f1, tc_accuracy, EvalError, EvalReport};

/// Which knob the sweep turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Training-set size; full-weight training at each size.
    DatasetSize,
    /// LoRA rank with alpha set equal to it; adapter training at each value.
    LoraRankAlpha,
}

/// Grid description for one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
}

/// Everything a sweep cell needs to train and score a model.
#[derive(Debug, Clone)]
pub struct SweepInputs<'a> {
    pub train: &'a Dataset,
    pub test: &'a Dataset,
    pub model_cfg: ModelConfig,
    pub train_cfg: TrainConfig,
    pub lora: LoraConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub axis_value: usize,
    pub repetition: usize,
    pub metric: f64,
    pub trainable_ratio: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub axis_value: usize,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub metric_name: &'static str,
    pub cells: Vec<SweepCell>,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SweepError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
}

/// Score a trained model against a gold dataset by predicting every text.
pub fn evaluate_model<M: TokenScorer>(model: &M, gold: &Dataset) -> Result<EvalReport, EvalError> {
    let mut predictions = Vec::with_capacity(gold.len());
    for ex in gold.iter() {
        predictions.push(predict(model, &ex.text, gold.schema()));
    }
    let pred = Dataset::new(gold.schema().clone(), predictions)
        .expect("predictions validate against the schema they were decoded from");
    match gold.schema().task() {
        TaskKind::Ner => entity_f1(&pred, gold),
        TaskKind::Tc => tc_accuracy(&pred, gold),
    }
}

fn metric_of(report: &EvalReport, task: TaskKind) -> f64 {
    match task {
        TaskKind::Ner => report.f1,
        TaskKind::Tc => report.accuracy.unwrap_or(report.f1),
    }
}

fn subsample(dataset: &Dataset, size: usize, seed: u64) -> Dataset {
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.truncate(size.min(dataset.len()));
    let examples = indices
        .iter()
        .map(|&i| dataset.examples()[i].clone())
        .collect();
    Dataset::new(dataset.schema().clone(), examples).expect("subsample of a valid dataset")
}

fn run_cell(spec: &SweepSpec, inputs: &SweepInputs<'_>, axis_value: usize, rep: usize) -> SweepCell {
    let cell_seed = seed_of(&[spec.base_seed, axis_value as u64, rep as u64]);
    let mut train_cfg = inputs.train_cfg;
    train_cfg.rng_seed = cell_seed;

    let outcome = (|| -> Result<(f64, f64), String> {
        let task = inputs.train.schema().task();
        match spec.axis {
            SweepAxis::DatasetSize => {
                let subset = subsample(inputs.train, axis_value, cell_seed);
                let (encoded, _) =
                    encode_dataset(&subset, &inputs.model_cfg).map_err(|e| e.to_string())?;
                let mut model =
                    init_model(inputs.model_cfg, cell_seed).map_err(|e| e.to_string())?;
                train(&mut model, &encoded, &train_cfg, standard_dev_metric)
                    .map_err(|e| e.to_string())?;
                let report = evaluate_model(&model, inputs.test).map_err(|e| e.to_string())?;
                Ok((metric_of(&report, task), 1.0))
            }
            SweepAxis::LoraRankAlpha => {
                let (encoded, _) =
                    encode_dataset(inputs.train, &inputs.model_cfg).map_err(|e| e.to_string())?;
                let model = init_model(inputs.model_cfg, cell_seed).map_err(|e| e.to_string())?;
                let lora_cfg = LoraConfig {
                    rank: axis_value,
                    alpha: axis_value as f64,
                    ..inputs.lora.clone()
                };
                let mut adapted =
                    wrap_lora(model, lora_cfg, cell_seed).map_err(|e| e.to_string())?;
                train(&mut adapted, &encoded, &train_cfg, standard_dev_metric)
                    .map_err(|e| e.to_string())?;
                let ratio = count_params_adapted(&adapted).trainable_ratio;
                let report = evaluate_model(&adapted, inputs.test).map_err(|e| e.to_string())?;
                Ok((metric_of(&report, task), ratio))
            }
        }
    })();

    match outcome {
        Ok((metric, ratio)) => SweepCell {
            axis_value,
            repetition: rep,
            metric,
            trainable_ratio: ratio,
            error: None,
        },
        Err(message) => SweepCell {
            axis_value,
            repetition: rep,
            metric: 0.0,
            trainable_ratio: 0.0,
            error: Some(message),
        },
    }
}

/// Run every (grid value, repetition) cell, changing only the axis variable,
/// with a deterministic per-cell seed. A cell's failure is recorded in its
/// row and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, inputs: &SweepInputs<'_>) -> Result<SweepTable, SweepError> {
    if spec.grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    if spec.repetitions == 0 {
        return Err(SweepError::ZeroRepetitions);
    }

    let mut cells = Vec::with_capacity(spec.grid.len() * spec.repetitions);
    let mut points = Vec::with_capacity(spec.grid.len());
    for &axis_value in &spec.grid {
        let mut values = Vec::with_capacity(spec.repetitions);
        for rep in 0..spec.repetitions {
            let cell = run_cell(spec, inputs, axis_value, rep);
            if cell.error.is_none() {
                values.push(cell.metric);
            }
            cells.push(cell);
        }
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        let stddev = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (values.len() - 1) as f64;
            libm::sqrt(var)
        };
        points.push(SweepPoint {
            axis_value,
            mean,
            stddev,
        });
    }

    let metric_name = match inputs.train.schema().task() {
        TaskKind::Ner => "f1",
        TaskKind::Tc => "accuracy",
    };
    Ok(SweepTable {
        axis: spec.axis,
        metric_name,
        cells,
        points,
    })
}

/// Delimited rows `(axis, repetition, metric, value)`, one per recorded
/// number. Rank sweeps additionally emit the trainable-ratio rows.
pub fn sweep_rows(table: &SweepTable) -> Vec<String> {
    let mut rows = Vec::new();
    for cell in &table.cells {
        if let Some(err) = &cell.error {
            rows.push(format!(
                "{},{},error,{}",
                cell.axis_value,
                cell.repetition,
                err.replace(',', ";")
            ));
            continue;
        }
        rows.push(format!(
            "{},{},{},{}",
            cell.axis_value, cell.repetition, table.metric_name, cell.metric
        ));
        if table.axis == SweepAxis::LoraRankAlpha {
            rows.push(format!(
                "{},{},trainable_ratio,{}",
                cell.axis_value, cell.repetition, cell.trainable_ratio
            ));
        }
    }
    rows
}
