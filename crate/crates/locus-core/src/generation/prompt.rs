use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::corpus::{Annotation, LabelSchema, LabeledExample, TaskKind};
use crate::retrieval::RetrievalHit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    SeedBased,
    RetrievalBased,
}

/// A fully rendered generation prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaPrompt {
    pub kind: PromptKind,
    pub rendered_text: String,
    pub requested_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("seed examples are required")]
    NoSeeds,
    #[error("requested count must be positive")]
    ZeroCount,
    #[error("prompt context needs {need} retrieved examples but only {have} are available")]
    NotEnoughRetrieved { have: usize, need: usize },
}

/// Render one example in the same block format the model is asked to return.
pub fn render_example(ex: &LabeledExample) -> String {
    let mut out = String::new();
    let _ = write!(out, "Text: {}", ex.text);
    match &ex.annotation {
        Annotation::Entities(spans) => {
            let _ = write!(out, "\nEntities: [");
            for (i, span) in spans.iter().enumerate() {
                if i > 0 {
                    let _ = write!(out, ", ");
                }
                let _ = write!(out, "{}:{}", span.mention, span.label);
            }
            let _ = write!(out, "]");
        }
        Annotation::Class(label) => {
            let _ = write!(out, "\nLabel: {label}");
        }
    }
    out
}

fn render_label_inventory(schema: &LabelSchema) -> String {
    let mut out = String::new();
    for (i, label) in schema.labels().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&label.name);
        if let Some(definition) = &label.definition {
            let _ = write!(out, " ({definition})");
        }
    }
    out
}

fn render_example_list(examples: &[LabeledExample]) -> String {
    let mut out = String::new();
    for (i, ex) in examples.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&render_example(ex));
    }
    out
}

fn return_format(schema: &LabelSchema) -> &'static str {
    match schema.task() {
        TaskKind::Ner => {
            "Return format:\nText: [text greater than a certain length]\nEntities: [among the given entity list]"
        }
        TaskKind::Tc => {
            "Return format:\nText: [text greater than a certain length]\nLabel: [one of the given labels]"
        }
    }
}

fn inventory_word(schema: &LabelSchema) -> &'static str {
    match schema.task() {
        TaskKind::Ner => "Entities",
        TaskKind::Tc => "Labels",
    }
}

/// Prompt built from seed examples alone.
pub fn build_seed_prompt(
    schema: &LabelSchema,
    seeds: &[LabeledExample],
    count: usize,
) -> Result<MetaPrompt, PromptError> {
    if seeds.is_empty() {
        return Err(PromptError::NoSeeds);
    }
    if count == 0 {
        return Err(PromptError::ZeroCount);
    }
    let mut text = String::new();
    let _ = write!(
        text,
        "Generate a diverse dataset with features:\n\
         (1) Real-world entities\n\
         (2) Multifactorial, including outliers for robustness.\n\
         (3) Domain: {domain}, {word}: {inventory}, guided by the examples below.\n\n\
         Examples:\n{examples}\n\n\
         Generate exactly {count} new examples.\n\n\
         {format}",
        domain = schema.domain(),
        word = inventory_word(schema),
        inventory = render_label_inventory(schema),
        examples = render_example_list(seeds),
        count = count,
        format = return_format(schema),
    );
    Ok(MetaPrompt {
        kind: PromptKind::SeedBased,
        rendered_text: text,
        requested_count: count,
    })
}

/// Prompt whose context also contains the top-m retrieved corpus sentences.
pub fn build_retrieval_prompt(
    schema: &LabelSchema,
    seeds: &[LabeledExample],
    retrieved: &[RetrievalHit],
    m: usize,
    count: usize,
) -> Result<MetaPrompt, PromptError> {
    if seeds.is_empty() {
        return Err(PromptError::NoSeeds);
    }
    if count == 0 {
        return Err(PromptError::ZeroCount);
    }
    if m == 0 || retrieved.len() < m {
        return Err(PromptError::NotEnoughRetrieved {
            have: retrieved.len(),
            need: m.max(1),
        });
    }
    let context: Vec<LabeledExample> = retrieved[..m].iter().map(|h| h.example.clone()).collect();
    let mut text = String::new();
    let _ = write!(
        text,
        "Given a context of relevant samples, generate diverse data:\n\
         (1) Real-world entities\n\
         (2) Multifactorial with outliers.\n\
         (3) Domain: {domain}, {word}: {inventory}, guided by the examples below with the retrieved samples.\n\n\
         Examples:\n{examples}\n\n\
         Retrieved samples:\n{retrieved}\n\n\
         Generate exactly {count} new examples.\n\n\
         {format}",
        domain = schema.domain(),
        word = inventory_word(schema),
        inventory = render_label_inventory(schema),
        examples = render_example_list(seeds),
        retrieved = render_example_list(&context),
        count = count,
        format = return_format(schema),
    );
    Ok(MetaPrompt {
        kind: PromptKind::RetrievalBased,
        rendered_text: text,
        requested_count: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dataset, EntitySpan, Label, Provenance};
    use crate::retrieval::{build_index, retrieve_top_k, HashEmbedder};
    use alloc::format;
    use alloc::vec;

    fn ner_schema() -> LabelSchema {
        LabelSchema::new(
            TaskKind::Ner,
            "travel notes",
            vec![Label::new("person"), Label::new("location")],
        )
        .unwrap()
    }

    fn seed() -> LabeledExample {
        LabeledExample::ner(
            "john lives in paris",
            vec![
                EntitySpan::new(0, 4, "person", "john"),
                EntitySpan::new(14, 19, "location", "paris"),
            ],
            Provenance::User,
        )
    }

    #[test]
    fn seed_prompt_contains_labels_seed_and_format() {
        let prompt = build_seed_prompt(&ner_schema(), &[seed()], 5).unwrap();
        let text = &prompt.rendered_text;
        assert!(text.contains("person"));
        assert!(text.contains("location"));
        assert!(text.contains("john lives in paris"));
        assert!(text.contains("Text: [text greater than a certain length]"));
        assert!(text.contains("Entities: [among the given entity list]"));
        assert!(text.contains("travel notes"));
        assert_eq!(prompt.requested_count, 5);
    }

    #[test]
    fn count_is_spelled_out() {
        let prompt = build_seed_prompt(&ner_schema(), &[seed()], 1).unwrap();
        assert!(prompt.rendered_text.contains("Generate exactly 1 new example"));
    }

    #[test]
    fn tc_prompt_uses_label_return_format() {
        let schema = LabelSchema::new(
            TaskKind::Tc,
            "news wire",
            vec![Label::new("sports"), Label::new("finance")],
        )
        .unwrap();
        let seed = LabeledExample::tc("the match went to overtime", "sports", Provenance::User);
        let prompt = build_seed_prompt(&schema, &[seed], 3).unwrap();
        assert!(prompt.rendered_text.contains("Label: [one of the given labels]"));
        assert!(!prompt.rendered_text.contains("entity list"));
    }

    #[test]
    fn retrieval_prompt_embeds_exactly_top_m() {
        let schema = ner_schema();
        let corpus_texts = [
            "maria flew to lisbon",
            "the cat slept all day",
            "pierre walked around lyon",
            "a hot cup of coffee",
            "ana hiked near porto",
        ];
        let corpus = Dataset::new(
            schema.clone(),
            corpus_texts
                .iter()
                .map(|t| LabeledExample::ner(*t, vec![], Provenance::Corpus))
                .collect(),
        )
        .unwrap();
        let embedder = HashEmbedder::default();
        let index = build_index(&corpus, &embedder).unwrap();
        let seeds = Dataset::new(schema.clone(), vec![seed()]).unwrap();
        let hits = retrieve_top_k(&index, &seeds, 5, &embedder).unwrap();

        let prompt = build_retrieval_prompt(&schema, seeds.examples(), &hits, 3, 4).unwrap();
        for hit in &hits[..3] {
            assert!(prompt.rendered_text.contains(&hit.example.text));
        }
        for hit in &hits[3..] {
            assert!(!prompt.rendered_text.contains(&hit.example.text));
        }
    }

    #[test]
    fn retrieval_prompt_needs_enough_hits() {
        let schema = ner_schema();
        let err = build_retrieval_prompt(&schema, &[seed()], &[], 1, 4).unwrap_err();
        assert_eq!(err, PromptError::NotEnoughRetrieved { have: 0, need: 1 });
    }

    #[test]
    fn prompts_differ_when_context_differs() {
        let schema = ner_schema();
        let a = build_seed_prompt(&schema, &[seed()], 5).unwrap();
        let other = LabeledExample::ner(
            "mary drove to berlin",
            vec![
                EntitySpan::new(0, 4, "person", "mary"),
                EntitySpan::new(14, 20, "location", "berlin"),
            ],
            Provenance::User,
        );
        let b = build_seed_prompt(&schema, &[other], 5).unwrap();
        assert_ne!(a.rendered_text, b.rendered_text);
    }

    #[test]
    fn rendered_example_matches_parse_format() {
        let rendered = render_example(&seed());
        assert_eq!(
            rendered,
            "Text: john lives in paris\nEntities: [john:person, paris:location]"
        );
        let tc = LabeledExample::tc("stocks fell", "finance", Provenance::User);
        assert_eq!(format!("{}", render_example(&tc)), "Text: stocks fell\nLabel: finance");
    }
}
