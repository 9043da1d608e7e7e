//! Low-rank adaptation of the compact model.
//!
//! Base weights stay frozen; each adapted weight matrix `W` (`d_out x d_in`)
//! gets a trainable factor pair `(A, B)` with effective delta
//! `(alpha / rank) * B * A`. `B` starts at zero so a freshly wrapped model
//! is indistinguishable from its base. Two routes produce adapters: training
//! them directly, or compressing the delta of an already fine-tuned model
//! with a truncated SVD ([`decompose_delta`]).

mod svd;

pub use svd::{decompose_delta, jacobi_svd, Svd, SvdError};

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::matrix::snap_f32;
use crate::model::net::{loss_and_grads_impl, pool, trace_tokens, AdapterView};
use crate::model::{DenseMatrix, Model, ModelConfig, TokenScorer, TrainExample, Trainable, WeightId};

/// Adapter hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LoraConfig {
    pub rank: usize,
    pub alpha: f64,
    /// Which base matrices to adapt; hidden and output linears by default.
    /// Embeddings are left alone: under the hashing scheme they are large
    /// and sparsely touched.
    pub targets: Vec<WeightId>,
    /// `A` is drawn uniform with bound `init_scale / sqrt(d_in)`.
    pub init_scale: f64,
}

impl Default for LoraConfig {
    fn default() -> Self {
        LoraConfig {
            rank: 32,
            alpha: 32.0,
            targets: alloc::vec![WeightId::Hidden, WeightId::Output],
            init_scale: 1.0,
        }
    }
}

impl LoraConfig {
    pub fn with_rank_alpha(rank: usize, alpha: f64) -> Self {
        LoraConfig {
            rank,
            alpha,
            ..LoraConfig::default()
        }
    }

    /// Effective delta scaling `alpha / rank`.
    pub fn scale(&self) -> f64 {
        self.alpha / self.rank as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoraError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("alpha must be positive")]
    BadAlpha,
    #[error("no target matrices selected")]
    NoTargets,
    #[error("target listed twice")]
    DuplicateTarget,
    #[error("rank {rank} exceeds min dimension {max} of target {target:?}")]
    RankTooLarge {
        target: WeightId,
        rank: usize,
        max: usize,
    },
    #[error("adapter shapes do not fit the base model")]
    ShapeMismatch,
}

/// One trained factor pair: `a` is `rank x d_in`, `b` is `d_out x rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterPair {
    pub target: WeightId,
    pub a: DenseMatrix,
    pub b: DenseMatrix,
}

impl AdapterPair {
    pub fn rank(&self) -> usize {
        self.a.rows()
    }

    /// Trainable parameters in this pair: `rank * (d_in + d_out)`.
    pub fn param_count(&self) -> usize {
        self.a.len() + self.b.len()
    }

    /// Materialize `scale * B * A`.
    pub fn delta(&self, scale: f64) -> DenseMatrix {
        let mut d = self.b.matmul(&self.a);
        for v in d.values_mut() {
            *v *= scale;
        }
        d
    }
}

/// A frozen base model plus its adapter pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedModel {
    base: Model,
    cfg: LoraConfig,
    adapters: Vec<AdapterPair>,
}

/// Wrap a model with freshly initialized adapters.
///
/// `A` is seeded uniform, `B` is zero, so at initialization the adapted
/// model's outputs equal the base model's outputs exactly.
pub fn wrap_lora(model: Model, cfg: LoraConfig, rng_seed: u64) -> Result<AdaptedModel, LoraError> {
    if cfg.rank == 0 {
        return Err(LoraError::ZeroRank);
    }
    if !(cfg.alpha > 0.0) {
        return Err(LoraError::BadAlpha);
    }
    if cfg.targets.is_empty() {
        return Err(LoraError::NoTargets);
    }
    for (i, t) in cfg.targets.iter().enumerate() {
        if cfg.targets[..i].contains(t) {
            return Err(LoraError::DuplicateTarget);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut adapters = Vec::with_capacity(cfg.targets.len());
    for &target in &cfg.targets {
        let w = model.weight(target);
        let (d_out, d_in) = (w.rows(), w.cols());
        let max = d_out.min(d_in);
        if cfg.rank > max {
            return Err(LoraError::RankTooLarge {
                target,
                rank: cfg.rank,
                max,
            });
        }
        let bound = cfg.init_scale / libm::sqrt(d_in as f64);
        let mut a = DenseMatrix::zeros(cfg.rank, d_in);
        for v in a.values_mut() {
            *v = snap_f32(bound * (rng.random::<f64>() * 2.0 - 1.0));
        }
        adapters.push(AdapterPair {
            target,
            a,
            b: DenseMatrix::zeros(d_out, cfg.rank),
        });
    }
    Ok(AdaptedModel {
        base: model,
        cfg,
        adapters,
    })
}

impl AdaptedModel {
    /// Reassemble from stored parts (adapter checkpoint loading), validating
    /// every shape against the base model.
    pub fn from_parts(
        base: Model,
        cfg: LoraConfig,
        adapters: Vec<AdapterPair>,
    ) -> Result<Self, LoraError> {
        if adapters.len() != cfg.targets.len() {
            return Err(LoraError::ShapeMismatch);
        }
        for (pair, &target) in adapters.iter().zip(cfg.targets.iter()) {
            let w = base.weight(target);
            if pair.target != target
                || pair.a.rows() != cfg.rank
                || pair.a.cols() != w.cols()
                || pair.b.rows() != w.rows()
                || pair.b.cols() != cfg.rank
            {
                return Err(LoraError::ShapeMismatch);
            }
        }
        Ok(AdaptedModel {
            base,
            cfg,
            adapters,
        })
    }

    pub fn base(&self) -> &Model {
        &self.base
    }

    pub fn lora_config(&self) -> &LoraConfig {
        &self.cfg
    }

    pub fn adapters(&self) -> &[AdapterPair] {
        &self.adapters
    }

    pub fn into_parts(self) -> (Model, LoraConfig, Vec<AdapterPair>) {
        (self.base, self.cfg, self.adapters)
    }

    fn pair(&self, target: WeightId) -> Option<&AdapterPair> {
        self.adapters.iter().find(|p| p.target == target)
    }

    fn view(&self) -> AdapterView<'_> {
        AdapterView {
            scale: self.cfg.scale(),
            hidden: self.pair(WeightId::Hidden).map(|p| (&p.a, &p.b)),
            output: self.pair(WeightId::Output).map(|p| (&p.a, &p.b)),
        }
    }

    /// Per-token logits with the adapter deltas applied on the fly; the
    /// merged matrices are never materialized.
    pub fn forward_tokens(&self, buckets: &[usize]) -> Vec<Vec<f64>> {
        trace_tokens(&self.base, buckets, Some(&self.view()))
            .into_iter()
            .map(|t| t.z)
            .collect()
    }

    pub fn forward_pooled(&self, buckets: &[usize]) -> Option<Vec<f64>> {
        pool(&self.forward_tokens(buckets))
    }
}

impl TokenScorer for AdaptedModel {
    fn model_config(&self) -> &ModelConfig {
        self.base.config()
    }

    fn token_logits(&self, buckets: &[usize]) -> Vec<Vec<f64>> {
        self.forward_tokens(buckets)
    }
}

impl Trainable for AdaptedModel {
    fn trainable_len(&self) -> usize {
        self.adapters.iter().map(|p| p.param_count()).sum()
    }

    fn get_param(&self, idx: usize) -> f64 {
        let mut rest = idx;
        for pair in &self.adapters {
            if rest < pair.a.len() {
                return pair.a.values()[rest];
            }
            rest -= pair.a.len();
            if rest < pair.b.len() {
                return pair.b.values()[rest];
            }
            rest -= pair.b.len();
        }
        panic!("adapter parameter index {idx} out of range");
    }

    fn set_param(&mut self, idx: usize, value: f64) {
        let mut rest = idx;
        for pair in &mut self.adapters {
            if rest < pair.a.len() {
                pair.a.values_mut()[rest] = value;
                return;
            }
            rest -= pair.a.len();
            if rest < pair.b.len() {
                pair.b.values_mut()[rest] = value;
                return;
            }
            rest -= pair.b.len();
        }
        panic!("adapter parameter index {idx} out of range");
    }

    fn loss_and_grads(&self, batch: &[&TrainExample]) -> (f64, Vec<f64>) {
        let view = self.view();
        let (loss, _, grads) = loss_and_grads_impl(&self.base, Some(&view), batch, false, true);
        let grads = grads.expect("adapter gradients requested");
        let mut flat = Vec::with_capacity(self.trainable_len());
        for pair in &self.adapters {
            let (da, db) = match pair.target {
                WeightId::Hidden => grads.hidden.as_ref().expect("hidden adapter traced"),
                WeightId::Output => grads.output.as_ref().expect("output adapter traced"),
            };
            flat.extend_from_slice(da.values());
            flat.extend_from_slice(db.values());
        }
        (loss, flat)
    }
}

/// Fold every adapter delta into the base weights.
///
/// Consumes the adapted model: after merging there are no adapters left to
/// merge twice. The sums stay in `f64` without rounding so the merged
/// forward matches the adapted forward to machine precision.
pub fn merge_adapters(am: AdaptedModel) -> Model {
    let (mut base, cfg, adapters) = am.into_parts();
    let scale = cfg.scale();
    for pair in adapters {
        let delta = pair.delta(scale);
        let w = base.weight_mut(pair.target);
        for (v, d) in w.values_mut().iter_mut().zip(delta.values().iter()) {
            *v += d;
        }
    }
    base
}

/// Parameter accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamCount {
    pub total: usize,
    pub trainable: usize,
    pub trainable_ratio: f64,
}

pub fn count_params_model(model: &Model) -> ParamCount {
    let total = model.config().param_count();
    ParamCount {
        total,
        trainable: total,
        trainable_ratio: 1.0,
    }
}

pub fn count_params_adapted(am: &AdaptedModel) -> ParamCount {
    let total = am.base().config().param_count();
    let trainable = am.adapters().iter().map(|p| p.param_count()).sum();
    ParamCount {
        total,
        trainable,
        trainable_ratio: trainable as f64 / total as f64,
    }
}
