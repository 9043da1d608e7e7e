use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{to_bio, tokenize, Annotation, Dataset, TaskKind};
use crate::hashing::fnv1a64;

use super::config::ModelConfig;

/// Vocabulary bucket for a token: stable hash of the lowercased form.
pub fn hash_bucket(token: &str, vocab_buckets: usize) -> usize {
    let lower = token.to_lowercase();
    (fnv1a64(lower.as_bytes()) % vocab_buckets as u64) as usize
}

/// Gold annotation in model space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gold {
    /// One BIO tag id per token.
    Tags(Vec<usize>),
    /// Class index.
    Class(usize),
}

/// One example ready for the network: hashed tokens plus gold labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainExample {
    pub buckets: Vec<usize>,
    pub gold: Gold,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeStats {
    pub total: usize,
    pub encoded: usize,
    /// NER examples whose spans crossed token boundaries.
    pub unalignable: usize,
    /// Examples with no tokens at all.
    pub empty: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("dataset task does not match model task")]
    TaskMismatch,
    #[error("no trainable examples: {total} inputs, {unalignable} unalignable, {empty} empty")]
    NothingTrainable {
        total: usize,
        unalignable: usize,
        empty: usize,
    },
    #[error("label {0:?} missing from schema during encoding")]
    UnknownLabel(String),
}

/// Convert a validated dataset into model inputs.
///
/// Unalignable NER examples are counted and excluded rather than failing the
/// whole dataset; an error is returned only when nothing survives.
pub fn encode_dataset(
    dataset: &Dataset,
    cfg: &ModelConfig,
) -> Result<(Vec<TrainExample>, EncodeStats), EncodeError> {
    if dataset.schema().task() != cfg.task {
        return Err(EncodeError::TaskMismatch);
    }
    let mut stats = EncodeStats::default();
    let mut out = Vec::with_capacity(dataset.len());
    for ex in dataset.iter() {
        stats.total += 1;
        let tokens = tokenize(&ex.text);
        if tokens.is_empty() {
            stats.empty += 1;
            continue;
        }
        let buckets: Vec<usize> = tokens
            .iter()
            .map(|t| hash_bucket(&t.text, cfg.vocab_buckets))
            .collect();
        let gold = match (&ex.annotation, cfg.task) {
            (Annotation::Entities(_), TaskKind::Ner) => {
                match to_bio(ex, &tokens, dataset.schema()) {
                    Ok(tags) => Gold::Tags(tags.into_iter().map(|t| t.id()).collect()),
                    Err(crate::corpus::BioError::Unalignable { .. }) => {
                        stats.unalignable += 1;
                        continue;
                    }
                    Err(crate::corpus::BioError::UnknownLabel(label)) => {
                        return Err(EncodeError::UnknownLabel(label))
                    }
                }
            }
            (Annotation::Class(label), TaskKind::Tc) => {
                let idx = dataset
                    .schema()
                    .label_index(label)
                    .ok_or_else(|| EncodeError::UnknownLabel(label.clone()))?;
                Gold::Class(idx)
            }
            _ => return Err(EncodeError::TaskMismatch),
        };
        out.push(TrainExample { buckets, gold });
        stats.encoded += 1;
    }
    if out.is_empty() {
        return Err(EncodeError::NothingTrainable {
            total: stats.total,
            unalignable: stats.unalignable,
            empty: stats.empty,
        });
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntitySpan, Label, LabelSchema, LabeledExample, Provenance};
    use alloc::vec;

    fn ner_schema() -> LabelSchema {
        LabelSchema::new(TaskKind::Ner, "demo", vec![Label::new("person")]).unwrap()
    }

    #[test]
    fn bucket_hash_is_case_insensitive_and_in_range() {
        assert_eq!(hash_bucket("Paris", 64), hash_bucket("paris", 64));
        for token in ["a", "b", "paris", "東京"] {
            assert!(hash_bucket(token, 7) < 7);
        }
    }

    #[test]
    fn unalignable_examples_are_excluded_and_counted() {
        let schema = ner_schema();
        let good = LabeledExample::ner(
            "john lives",
            vec![EntitySpan::new(0, 4, "person", "john")],
            Provenance::User,
        );
        let bad = LabeledExample::ner(
            "john lives",
            vec![EntitySpan::new(0, 2, "person", "jo")],
            Provenance::User,
        );
        let ds = Dataset::new(schema.clone(), vec![good, bad]).unwrap();
        let cfg = ModelConfig::for_schema(&schema, 64, 8, 1, 16);
        let (examples, stats) = encode_dataset(&ds, &cfg).unwrap();
        assert_eq!(examples.len(), 1);
        assert_eq!(stats.unalignable, 1);
        assert_eq!(examples[0].gold, Gold::Tags(vec![1, 0]));
    }

    #[test]
    fn all_unalignable_is_an_error() {
        let schema = ner_schema();
        let bad = LabeledExample::ner(
            "john lives",
            vec![EntitySpan::new(0, 2, "person", "jo")],
            Provenance::User,
        );
        let ds = Dataset::new(schema.clone(), vec![bad]).unwrap();
        let cfg = ModelConfig::for_schema(&schema, 64, 8, 1, 16);
        assert!(matches!(
            encode_dataset(&ds, &cfg),
            Err(EncodeError::NothingTrainable { total: 1, unalignable: 1, .. })
        ));
    }

    #[test]
    fn tc_labels_become_class_indices() {
        let schema = LabelSchema::new(
            TaskKind::Tc,
            "demo",
            vec![Label::new("sports"), Label::new("finance")],
        )
        .unwrap();
        let ds = Dataset::new(
            schema.clone(),
            vec![LabeledExample::tc("markets closed mixed", "finance", Provenance::User)],
        )
        .unwrap();
        let cfg = ModelConfig::for_schema(&schema, 64, 8, 0, 16);
        let (examples, _) = encode_dataset(&ds, &cfg).unwrap();
        assert_eq!(examples[0].gold, Gold::Class(1));
    }
}
