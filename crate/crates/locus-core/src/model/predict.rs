use alloc::vec::Vec;

use crate::corpus::{
    decode_tag_ids, tokenize, EntitySpan, LabelSchema, LabeledExample, Provenance, TaskKind,
};

use super::encode::hash_bucket;
use super::net::TokenScorer;

fn argmax(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Run inference on raw text.
///
/// NER: per-token argmax tags decoded to spans, repairing any `I` without a
/// matching `B`. TC: argmax over the pooled logits. Texts with no tokens get
/// no spans (NER) or the first label (TC). The schema must be the one the
/// model was trained against. Returned examples carry [`Provenance::User`];
/// provenance is meaningless for predictions.
pub fn predict<M: TokenScorer>(model: &M, text: &str, schema: &LabelSchema) -> LabeledExample {
    let cfg = model.model_config();
    assert_eq!(
        schema.num_classes(),
        cfg.num_labels,
        "schema does not match the model's output size"
    );
    assert_eq!(schema.task(), cfg.task, "schema task does not match the model");

    let tokens = tokenize(text);
    let buckets: Vec<usize> = tokens
        .iter()
        .map(|t| hash_bucket(&t.text, cfg.vocab_buckets))
        .collect();

    match cfg.task {
        TaskKind::Ner => {
            let logits = model.token_logits(&buckets);
            let tags: Vec<usize> = logits.iter().map(|z| argmax(z)).collect();
            let mut spans = Vec::new();
            for (label, start_tok, end_tok) in decode_tag_ids(&tags) {
                let start = tokens[start_tok].start;
                let end = tokens[end_tok - 1].end;
                if let Some(span) =
                    EntitySpan::from_text(text, start, end, schema.labels()[label].name.clone())
                {
                    spans.push(span);
                }
            }
            LabeledExample::ner(text, spans, Provenance::User)
        }
        TaskKind::Tc => {
            let label = match model.pooled_logits(&buckets) {
                Some(logits) => argmax(&logits),
                None => 0,
            };
            LabeledExample::tc(text, schema.labels()[label].name.clone(), Provenance::User)
        }
    }
}
