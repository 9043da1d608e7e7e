use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::TaskKind;

use super::config::{ModelConfig, ModelConfigError};
use super::encode::{Gold, TrainExample};
use super::matrix::{snap_f32, DenseMatrix, MatrixError};

/// The compact encoder: hashed embeddings -> windowed concatenation ->
/// tanh hidden layer -> linear output head.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    cfg: ModelConfig,
    embedding: DenseMatrix,
    hidden_w: DenseMatrix,
    hidden_b: Vec<f64>,
    out_w: DenseMatrix,
    out_b: Vec<f64>,
}

/// Seeded fan-in-scaled uniform initialization; weights are bitwise
/// reproducible for a fixed seed.
pub fn init_model(cfg: ModelConfig, rng_seed: u64) -> Result<Model, ModelConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut draw_matrix = |rows: usize, cols: usize, fan_in: usize| {
        let bound = 1.0 / libm::sqrt(fan_in as f64);
        let mut m = DenseMatrix::zeros(rows, cols);
        for v in m.values_mut() {
            *v = snap_f32(bound * (rng.random::<f64>() * 2.0 - 1.0));
        }
        m
    };
    let embedding = draw_matrix(cfg.vocab_buckets, cfg.embed_dim, cfg.embed_dim);
    let hidden_w = draw_matrix(cfg.hidden_dim, cfg.input_dim(), cfg.input_dim());
    let out_w = draw_matrix(cfg.num_labels, cfg.hidden_dim, cfg.hidden_dim);
    Ok(Model {
        cfg,
        embedding,
        hidden_w,
        hidden_b: alloc::vec![0.0; cfg.hidden_dim],
        out_w,
        out_b: alloc::vec![0.0; cfg.num_labels],
    })
}

impl Model {
    /// Reassemble a model from stored parts (checkpoint loading).
    pub fn from_parts(
        cfg: ModelConfig,
        embedding: DenseMatrix,
        hidden_w: DenseMatrix,
        hidden_b: Vec<f64>,
        out_w: DenseMatrix,
        out_b: Vec<f64>,
    ) -> Result<Self, MatrixError> {
        let checks = [
            (embedding.rows(), embedding.cols(), cfg.vocab_buckets, cfg.embed_dim),
            (hidden_w.rows(), hidden_w.cols(), cfg.hidden_dim, cfg.input_dim()),
            (out_w.rows(), out_w.cols(), cfg.num_labels, cfg.hidden_dim),
            (hidden_b.len(), 1, cfg.hidden_dim, 1),
            (out_b.len(), 1, cfg.num_labels, 1),
        ];
        for (rows, cols, want_rows, want_cols) in checks {
            if rows != want_rows || cols != want_cols {
                return Err(MatrixError::SizeMismatch {
                    rows: want_rows,
                    cols: want_cols,
                    expected: want_rows * want_cols,
                    found: rows * cols,
                });
            }
        }
        Ok(Model {
            cfg,
            embedding,
            hidden_w,
            hidden_b,
            out_w,
            out_b,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn embedding(&self) -> &DenseMatrix {
        &self.embedding
    }

    pub fn hidden_w(&self) -> &DenseMatrix {
        &self.hidden_w
    }

    pub fn hidden_b(&self) -> &[f64] {
        &self.hidden_b
    }

    pub fn out_w(&self) -> &DenseMatrix {
        &self.out_w
    }

    pub fn out_b(&self) -> &[f64] {
        &self.out_b
    }

    pub(crate) fn weight(&self, target: WeightId) -> &DenseMatrix {
        match target {
            WeightId::Hidden => &self.hidden_w,
            WeightId::Output => &self.out_w,
        }
    }

    pub(crate) fn weight_mut(&mut self, target: WeightId) -> &mut DenseMatrix {
        match target {
            WeightId::Hidden => &mut self.hidden_w,
            WeightId::Output => &mut self.out_w,
        }
    }

    pub(crate) fn embedding_mut(&mut self) -> &mut DenseMatrix {
        &mut self.embedding
    }

    pub(crate) fn hidden_w_mut(&mut self) -> &mut DenseMatrix {
        &mut self.hidden_w
    }

    pub(crate) fn hidden_b_mut(&mut self) -> &mut [f64] {
        &mut self.hidden_b
    }

    pub(crate) fn out_w_mut(&mut self) -> &mut DenseMatrix {
        &mut self.out_w
    }

    pub(crate) fn out_b_mut(&mut self) -> &mut [f64] {
        &mut self.out_b
    }

    /// Map a flat parameter index to (section, offset). Section order:
    /// embedding, hidden weights, hidden bias, output weights, output bias.
    pub(crate) fn locate(&self, idx: usize) -> (u8, usize) {
        let mut rest = idx;
        let sizes = [
            self.cfg.vocab_buckets * self.cfg.embed_dim,
            self.cfg.hidden_dim * self.cfg.input_dim(),
            self.cfg.hidden_dim,
            self.cfg.num_labels * self.cfg.hidden_dim,
            self.cfg.num_labels,
        ];
        for (section, &size) in sizes.iter().enumerate() {
            if rest < size {
                return (section as u8, rest);
            }
            rest -= size;
        }
        panic!("parameter index {idx} out of range");
    }

    /// Per-token logits, shape `tokens x num_labels`.
    pub fn forward_tokens(&self, buckets: &[usize]) -> Vec<Vec<f64>> {
        trace_tokens(self, buckets, None)
            .into_iter()
            .map(|t| t.z)
            .collect()
    }

    /// Mean-pooled logits for classification; `None` on an empty sequence.
    pub fn forward_pooled(&self, buckets: &[usize]) -> Option<Vec<f64>> {
        pool(&self.forward_tokens(buckets))
    }
}

/// Read-only scoring interface shared by the plain model and its
/// adapter-wrapped counterpart.
pub trait TokenScorer {
    fn model_config(&self) -> &ModelConfig;
    fn token_logits(&self, buckets: &[usize]) -> Vec<Vec<f64>>;

    fn pooled_logits(&self, buckets: &[usize]) -> Option<Vec<f64>> {
        pool(&self.token_logits(buckets))
    }
}

impl TokenScorer for Model {
    fn model_config(&self) -> &ModelConfig {
        &self.cfg
    }

    fn token_logits(&self, buckets: &[usize]) -> Vec<Vec<f64>> {
        self.forward_tokens(buckets)
    }
}

pub(crate) fn pool(token_logits: &[Vec<f64>]) -> Option<Vec<f64>> {
    if token_logits.is_empty() {
        return None;
    }
    let dim = token_logits[0].len();
    let mut mean = alloc::vec![0.0; dim];
    for z in token_logits {
        for (m, v) in mean.iter_mut().zip(z.iter()) {
            *m += v;
        }
    }
    let n = token_logits.len() as f64;
    for m in mean.iter_mut() {
        *m /= n;
    }
    Some(mean)
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.iter().map(|&v| libm::exp(v - max)).sum();
    max + libm::log(sum)
}

/// Which base weight matrix a transformation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WeightId {
    Hidden,
    Output,
}

/// Borrowed low-rank factors for the forward/backward passes.
/// `scale` is `alpha / rank`; each pair is `(a, b)` with effective delta
/// `scale * b * a`.
pub(crate) struct AdapterView<'a> {
    pub scale: f64,
    pub hidden: Option<(&'a DenseMatrix, &'a DenseMatrix)>,
    pub output: Option<(&'a DenseMatrix, &'a DenseMatrix)>,
}

pub(crate) struct TokenTrace {
    pub x: Vec<f64>,
    pub ax_hidden: Option<Vec<f64>>,
    pub h: Vec<f64>,
    pub ah_output: Option<Vec<f64>>,
    pub z: Vec<f64>,
}

/// Forward pass storing intermediates. The adapter contribution is added on
/// top of the exact base computation, so zeroed factors reproduce the base
/// outputs bit for bit.
pub(crate) fn trace_tokens(
    model: &Model,
    buckets: &[usize],
    adapters: Option<&AdapterView<'_>>,
) -> Vec<TokenTrace> {
    let cfg = &model.cfg;
    let window = cfg.window as isize;
    let embed_dim = cfg.embed_dim;
    let mut traces = Vec::with_capacity(buckets.len());
    for i in 0..buckets.len() {
        let mut x = alloc::vec![0.0; cfg.input_dim()];
        for (slot, offset) in (-window..=window).enumerate() {
            let pos = i as isize + offset;
            if pos < 0 || pos >= buckets.len() as isize {
                continue;
            }
            let row = model.embedding.row(buckets[pos as usize]);
            x[slot * embed_dim..(slot + 1) * embed_dim].copy_from_slice(row);
        }

        let mut pre = model.hidden_b.clone();
        model.hidden_w.matvec_add(&x, &mut pre);
        let mut ax_hidden = None;
        if let Some(view) = adapters {
            if let Some((a, b)) = view.hidden {
                let ax = a.matvec(&x);
                let mut delta = alloc::vec![0.0; pre.len()];
                b.matvec_add(&ax, &mut delta);
                for (p, d) in pre.iter_mut().zip(delta.iter()) {
                    *p += view.scale * d;
                }
                ax_hidden = Some(ax);
            }
        }
        let h: Vec<f64> = pre.iter().map(|&v| libm::tanh(v)).collect();

        let mut z = model.out_b.clone();
        model.out_w.matvec_add(&h, &mut z);
        let mut ah_output = None;
        if let Some(view) = adapters {
            if let Some((a, b)) = view.output {
                let ah = a.matvec(&h);
                let mut delta = alloc::vec![0.0; z.len()];
                b.matvec_add(&ah, &mut delta);
                for (p, d) in z.iter_mut().zip(delta.iter()) {
                    *p += view.scale * d;
                }
                ah_output = Some(ah);
            }
        }

        traces.push(TokenTrace {
            x,
            ax_hidden,
            h,
            ah_output,
            z,
        });
    }
    traces
}

/// Gradients aligned with the full parameter set.
#[derive(Debug, Clone)]
pub(crate) struct ModelGrads {
    pub embedding: DenseMatrix,
    pub hidden_w: DenseMatrix,
    pub hidden_b: Vec<f64>,
    pub out_w: DenseMatrix,
    pub out_b: Vec<f64>,
}

impl ModelGrads {
    fn zeros(cfg: &ModelConfig) -> Self {
        ModelGrads {
            embedding: DenseMatrix::zeros(cfg.vocab_buckets, cfg.embed_dim),
            hidden_w: DenseMatrix::zeros(cfg.hidden_dim, cfg.input_dim()),
            hidden_b: alloc::vec![0.0; cfg.hidden_dim],
            out_w: DenseMatrix::zeros(cfg.num_labels, cfg.hidden_dim),
            out_b: alloc::vec![0.0; cfg.num_labels],
        }
    }

    pub fn flatten(self) -> Vec<f64> {
        let mut out = Vec::with_capacity(
            self.embedding.len() + self.hidden_w.len() + self.hidden_b.len() + self.out_w.len() + self.out_b.len(),
        );
        out.extend_from_slice(self.embedding.values());
        out.extend_from_slice(self.hidden_w.values());
        out.extend_from_slice(&self.hidden_b);
        out.extend_from_slice(self.out_w.values());
        out.extend_from_slice(&self.out_b);
        out
    }
}

/// Gradients for the low-rank factors only, `(da, db)` per adapted target.
#[derive(Debug, Clone)]
pub(crate) struct AdapterGrads {
    pub hidden: Option<(DenseMatrix, DenseMatrix)>,
    pub output: Option<(DenseMatrix, DenseMatrix)>,
}

/// Mean cross-entropy and gradients over a batch.
///
/// NER averages over every token in the batch, TC over examples. Gradients
/// are returned for the base parameters, the adapter factors, or both,
/// depending on which sinks are requested.
pub(crate) fn loss_and_grads_impl(
    model: &Model,
    adapters: Option<&AdapterView<'_>>,
    batch: &[&TrainExample],
    want_base: bool,
    want_adapters: bool,
) -> (f64, Option<ModelGrads>, Option<AdapterGrads>) {
    let cfg = model.cfg;
    let mut base = want_base.then(|| ModelGrads::zeros(&cfg));
    let mut adapter_grads = match (want_adapters, adapters) {
        (true, Some(view)) => Some(AdapterGrads {
            hidden: view.hidden.map(|(a, b)| {
                (DenseMatrix::zeros(a.rows(), a.cols()), DenseMatrix::zeros(b.rows(), b.cols()))
            }),
            output: view.output.map(|(a, b)| {
                (DenseMatrix::zeros(a.rows(), a.cols()), DenseMatrix::zeros(b.rows(), b.cols()))
            }),
        }),
        _ => None,
    };

    let denom = match cfg.task {
        TaskKind::Ner => batch.iter().map(|ex| ex.buckets.len()).sum::<usize>(),
        TaskKind::Tc => batch.iter().filter(|ex| !ex.buckets.is_empty()).count(),
    };
    if denom == 0 {
        return (0.0, base, adapter_grads);
    }
    let inv_denom = 1.0 / denom as f64;

    let mut loss = 0.0f64;
    for ex in batch {
        if ex.buckets.is_empty() {
            continue;
        }
        let traces = trace_tokens(model, &ex.buckets, adapters);
        match (&ex.gold, cfg.task) {
            (Gold::Tags(tags), TaskKind::Ner) => {
                debug_assert_eq!(tags.len(), traces.len());
                for (i, (trace, &gold)) in traces.iter().zip(tags.iter()).enumerate() {
                    loss += (log_sum_exp(&trace.z) - trace.z[gold]) * inv_denom;
                    let mut dz = softmax(&trace.z);
                    dz[gold] -= 1.0;
                    for v in dz.iter_mut() {
                        *v *= inv_denom;
                    }
                    backward_token(
                        model,
                        adapters,
                        trace,
                        i,
                        &dz,
                        ex,
                        base.as_mut(),
                        adapter_grads.as_mut(),
                    );
                }
            }
            (Gold::Class(gold), TaskKind::Tc) => {
                let zbar = pool(&traces.iter().map(|t| t.z.clone()).collect::<Vec<_>>())
                    .expect("non-empty sequence");
                loss += (log_sum_exp(&zbar) - zbar[*gold]) * inv_denom;
                let mut dzbar = softmax(&zbar);
                dzbar[*gold] -= 1.0;
                let token_scale = inv_denom / traces.len() as f64;
                let dz: Vec<f64> = dzbar.iter().map(|v| v * token_scale).collect();
                for (i, trace) in traces.iter().enumerate() {
                    backward_token(
                        model,
                        adapters,
                        trace,
                        i,
                        &dz,
                        ex,
                        base.as_mut(),
                        adapter_grads.as_mut(),
                    );
                }
            }
            _ => unreachable!("encode_dataset enforces task consistency"),
        }
    }

    (loss, base, adapter_grads)
}

#[allow(clippy::too_many_arguments)]
fn backward_token(
    model: &Model,
    adapters: Option<&AdapterView<'_>>,
    trace: &TokenTrace,
    token_index: usize,
    dz: &[f64],
    ex: &TrainExample,
    mut base: Option<&mut ModelGrads>,
    mut adapter_grads: Option<&mut AdapterGrads>,
) {
    let cfg = &model.cfg;

    if let Some(grads) = base.as_deref_mut() {
        grads.out_w.add_outer(dz, &trace.h, 1.0);
        for (g, d) in grads.out_b.iter_mut().zip(dz.iter()) {
            *g += d;
        }
    }

    let mut dh = model.out_w.matvec_t(dz);
    if let Some(view) = adapters {
        if let Some((a, b)) = view.output {
            let bt_dz = b.matvec_t(dz);
            if let Some(grads) = adapter_grads.as_deref_mut() {
                if let Some((da, db)) = grads.output.as_mut() {
                    let ah = trace.ah_output.as_ref().expect("traced with output adapter");
                    db.add_outer(dz, ah, view.scale);
                    da.add_outer(&bt_dz, &trace.h, view.scale);
                }
            }
            let mut extra = alloc::vec![0.0; dh.len()];
            a.matvec_t_add(&bt_dz, &mut extra);
            for (d, e) in dh.iter_mut().zip(extra.iter()) {
                *d += view.scale * e;
            }
        }
    }

    let dpre: Vec<f64> = dh
        .iter()
        .zip(trace.h.iter())
        .map(|(&d, &h)| d * (1.0 - h * h))
        .collect();

    if let Some(grads) = base.as_deref_mut() {
        grads.hidden_w.add_outer(&dpre, &trace.x, 1.0);
        for (g, d) in grads.hidden_b.iter_mut().zip(dpre.iter()) {
            *g += d;
        }
    }

    if let Some(view) = adapters {
        if let Some((_a, b)) = view.hidden {
            let bt_dpre = b.matvec_t(&dpre);
            if let Some(grads) = adapter_grads.as_deref_mut() {
                if let Some((da, db)) = grads.hidden.as_mut() {
                    let ax = trace.ax_hidden.as_ref().expect("traced with hidden adapter");
                    db.add_outer(&dpre, ax, view.scale);
                    da.add_outer(&bt_dpre, &trace.x, view.scale);
                }
            }
        }
    }

    if let Some(grads) = base.as_deref_mut() {
        let mut dx = model.hidden_w.matvec_t(&dpre);
        if let Some(view) = adapters {
            if let Some((a, b)) = view.hidden {
                let bt_dpre = b.matvec_t(&dpre);
                let mut extra = alloc::vec![0.0; dx.len()];
                a.matvec_t_add(&bt_dpre, &mut extra);
                for (d, e) in dx.iter_mut().zip(extra.iter()) {
                    *d += view.scale * e;
                }
            }
        }
        // Scatter the feature gradient back into the embedding rows that
        // filled each window slot.
        let window = cfg.window as isize;
        let embed_dim = cfg.embed_dim;
        for (slot, offset) in (-window..=window).enumerate() {
            let pos = token_index as isize + offset;
            if pos < 0 || pos >= ex.buckets.len() as isize {
                continue;
            }
            let bucket = ex.buckets[pos as usize];
            let segment = &dx[slot * embed_dim..(slot + 1) * embed_dim];
            let base_idx = bucket * embed_dim;
            let values = grads.embedding.values_mut();
            for (k, &d) in segment.iter().enumerate() {
                values[base_idx + k] += d;
            }
        }
    }
}
