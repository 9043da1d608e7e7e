use crate::corpus::{LabelSchema, TaskKind};

/// Shape of the compact encoder.
///
/// The architecture is fixed: hashed token embeddings, windowed
/// concatenation, one tanh hidden layer, and a linear output head read
/// per token (NER) or mean-pooled over tokens (TC).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    /// Hashing-trick vocabulary size.
    pub vocab_buckets: usize,
    pub embed_dim: usize,
    /// Context half-width: each token sees `2 * window + 1` embeddings.
    pub window: usize,
    pub hidden_dim: usize,
    /// Output classes: `2 * labels + 1` BIO tags for NER, `labels` for TC.
    pub num_labels: usize,
    pub task: TaskKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelConfigError {
    #[error("{field} must be at least 1")]
    ZeroDim { field: &'static str },
    #[error("NER needs an odd tag count of at least 3 (got {found}); use 2 * labels + 1")]
    BadBioCount { found: usize },
}

impl ModelConfig {
    /// Derive the output size from a schema.
    pub fn for_schema(
        schema: &LabelSchema,
        vocab_buckets: usize,
        embed_dim: usize,
        window: usize,
        hidden_dim: usize,
    ) -> Self {
        ModelConfig {
            vocab_buckets,
            embed_dim,
            window,
            hidden_dim,
            num_labels: schema.num_classes(),
            task: schema.task(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelConfigError> {
        for (field, value) in [
            ("vocab_buckets", self.vocab_buckets),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("num_labels", self.num_labels),
        ] {
            if value == 0 {
                return Err(ModelConfigError::ZeroDim { field });
            }
        }
        if self.task == TaskKind::Ner && (self.num_labels < 3 || self.num_labels % 2 == 0) {
            return Err(ModelConfigError::BadBioCount {
                found: self.num_labels,
            });
        }
        Ok(())
    }

    /// Width of one token's concatenated feature vector.
    pub fn input_dim(&self) -> usize {
        (2 * self.window + 1) * self.embed_dim
    }

    /// Total parameter count of the full model, in closed form.
    pub fn param_count(&self) -> usize {
        self.vocab_buckets * self.embed_dim
            + self.hidden_dim * self.input_dim()
            + self.hidden_dim
            + self.num_labels * self.hidden_dim
            + self.num_labels
    }
}
