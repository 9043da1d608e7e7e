//! The compact trainable model and its full-weight training loop.
//!
//! Architecture: hashing-trick token embeddings, a window of neighboring
//! embeddings concatenated per token, one tanh hidden layer, and a linear
//! head read per token (NER) or mean-pooled before softmax (TC). All math
//! runs in `f64`; parameters are kept exactly representable in `f32` so the
//! 32-bit checkpoint format round-trips losslessly.
//!
//! There is no pretrained backbone here on purpose: the model is a compact,
//! dependency-free stand-in behind the same contracts (train, predict,
//! checkpoint) that a transformer backend would satisfy.

mod config;
mod encode;
pub(crate) mod matrix;
pub(crate) mod net;
mod predict;
mod train;

pub use config::{ModelConfig, ModelConfigError};
pub use encode::{encode_dataset, hash_bucket, EncodeError, EncodeStats, Gold, TrainExample};
pub use matrix::{DenseMatrix, MatrixError};
pub use net::{init_model, softmax, Model, TokenScorer, WeightId};
pub use predict::predict;
pub use train::{
    standard_dev_metric, tag_span_f1, train, EpochRecord, StopReason, TrainConfig, TrainError,
    TrainHistory, Trainable,
};
