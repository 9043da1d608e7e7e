use alloc::string::String;
use alloc::vec::Vec;

use super::schema::LabelSchema;
use super::text::char_slice;
use super::validate::{validate_example, ValidationReport};

/// Where an example came from. The pipeline partitions its output by this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Hand-labeled user data.
    User,
    /// Generated from a seed-only prompt.
    SeedGen,
    /// Generated from a prompt with retrieved context.
    RetrievalGen,
    /// Taken verbatim from the universal corpus.
    Corpus,
}

/// One entity occurrence. Offsets count Unicode scalar values; `mention`
/// always equals the slice `text[start..end]` of the owning example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
    pub mention: String,
}

impl EntitySpan {
    pub fn new(
        start: usize,
        end: usize,
        label: impl Into<String>,
        mention: impl Into<String>,
    ) -> Self {
        EntitySpan {
            start,
            end,
            label: label.into(),
            mention: mention.into(),
        }
    }

    /// Build a span over `text`, recomputing the mention from the offsets.
    /// Returns `None` when the range does not fit the text.
    pub fn from_text(text: &str, start: usize, end: usize, label: impl Into<String>) -> Option<Self> {
        let mention = char_slice(text, start, end)?;
        Some(EntitySpan::new(start, end, label, mention))
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Task-specific annotation payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Annotation {
    Entities(Vec<EntitySpan>),
    Class(String),
}

/// One labeled sentence or document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub text: String,
    pub annotation: Annotation,
    pub provenance: Provenance,
}

impl LabeledExample {
    pub fn ner(text: impl Into<String>, mut entities: Vec<EntitySpan>, provenance: Provenance) -> Self {
        entities.sort_by_key(|s| (s.start, s.end));
        LabeledExample {
            text: text.into(),
            annotation: Annotation::Entities(entities),
            provenance,
        }
    }

    pub fn tc(text: impl Into<String>, label: impl Into<String>, provenance: Provenance) -> Self {
        LabeledExample {
            text: text.into(),
            annotation: Annotation::Class(label.into()),
            provenance,
        }
    }

    pub fn entities(&self) -> Option<&[EntitySpan]> {
        match &self.annotation {
            Annotation::Entities(spans) => Some(spans),
            Annotation::Class(_) => None,
        }
    }

    pub fn class_label(&self) -> Option<&str> {
        match &self.annotation {
            Annotation::Entities(_) => None,
            Annotation::Class(label) => Some(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("example {index} is invalid: {report}")]
    InvalidExample {
        index: usize,
        report: ValidationReport,
    },
}

/// A schema plus examples that are all valid against it, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: LabelSchema,
    examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn empty(schema: LabelSchema) -> Self {
        Dataset {
            schema,
            examples: Vec::new(),
        }
    }

    /// Build a dataset, validating every example against the schema.
    pub fn new(schema: LabelSchema, examples: Vec<LabeledExample>) -> Result<Self, DatasetError> {
        for (index, ex) in examples.iter().enumerate() {
            let report = validate_example(ex, &schema);
            if !report.is_valid() {
                return Err(DatasetError::InvalidExample { index, report });
            }
        }
        Ok(Dataset { schema, examples })
    }

    /// Append one example after validating it.
    pub fn push(&mut self, ex: LabeledExample) -> Result<(), ValidationReport> {
        let report = validate_example(&ex, &self.schema);
        if !report.is_valid() {
            return Err(report);
        }
        self.examples.push(ex);
        Ok(())
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> core::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::schema::{Label, TaskKind};
    use alloc::vec;

    fn schema() -> LabelSchema {
        LabelSchema::new(TaskKind::Ner, "demo", vec![Label::new("person")]).unwrap()
    }

    #[test]
    fn dataset_rejects_invalid_examples() {
        let bad = LabeledExample::ner(
            "john",
            vec![EntitySpan::new(0, 9, "person", "john plus")],
            Provenance::User,
        );
        let err = Dataset::new(schema(), vec![bad]).unwrap_err();
        assert!(matches!(err, DatasetError::InvalidExample { index: 0, .. }));
    }

    #[test]
    fn ner_constructor_sorts_spans() {
        let ex = LabeledExample::ner(
            "john met mary",
            vec![
                EntitySpan::new(9, 13, "person", "mary"),
                EntitySpan::new(0, 4, "person", "john"),
            ],
            Provenance::User,
        );
        let spans = ex.entities().unwrap();
        assert_eq!(spans[0].start, 0);
        assert_eq!(spans[1].start, 9);
    }

    #[test]
    fn span_from_text_recomputes_mention() {
        let span = EntitySpan::from_text("john lives", 0, 4, "person").unwrap();
        assert_eq!(span.mention, "john");
        assert!(EntitySpan::from_text("john", 0, 9, "person").is_none());
    }
}
