use alloc::string::String;
use alloc::vec::Vec;

/// Which task a schema (and every dataset built from it) describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Named entity recognition: examples carry entity spans.
    Ner,
    /// Text classification: examples carry a single class label.
    Tc,
}

/// One label in the user's inventory, optionally with a free-text definition
/// that prompt templates may surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub name: String,
    pub definition: Option<String>,
}

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label {
            name: name.into(),
            definition: None,
        }
    }

    pub fn with_definition(name: impl Into<String>, definition: impl Into<String>) -> Self {
        Label {
            name: name.into(),
            definition: Some(definition.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("schema has no labels")]
    NoLabels,
    #[error("duplicate label name: {0}")]
    DuplicateLabel(String),
}

/// The label inventory governing validation, prompting and model shape.
///
/// Labels keep their declared order; the position of a label is its class
/// index for the model, so a schema is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    task: TaskKind,
    domain: String,
    labels: Vec<Label>,
}

impl LabelSchema {
    pub fn new(
        task: TaskKind,
        domain: impl Into<String>,
        labels: Vec<Label>,
    ) -> Result<Self, SchemaError> {
        if labels.is_empty() {
            return Err(SchemaError::NoLabels);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].iter().any(|l| l.name == label.name) {
                return Err(SchemaError::DuplicateLabel(label.name.clone()));
            }
        }
        Ok(LabelSchema {
            task,
            domain: domain.into(),
            labels,
        })
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn contains(&self, name: &str) -> bool {
        self.labels.iter().any(|l| l.name == name)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    /// Number of model output classes: `2n + 1` BIO tags for NER, `n` for TC.
    pub fn num_classes(&self) -> usize {
        match self.task {
            TaskKind::Ner => 2 * self.labels.len() + 1,
            TaskKind::Tc => self.labels.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_empty_and_duplicate_labels() {
        assert_eq!(
            LabelSchema::new(TaskKind::Ner, "d", vec![]),
            Err(SchemaError::NoLabels)
        );
        let dup = vec![Label::new("person"), Label::new("person")];
        assert!(matches!(
            LabelSchema::new(TaskKind::Ner, "d", dup),
            Err(SchemaError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn class_counts_follow_task() {
        let labels = vec![Label::new("person"), Label::new("location")];
        let ner = LabelSchema::new(TaskKind::Ner, "d", labels.clone()).unwrap();
        let tc = LabelSchema::new(TaskKind::Tc, "d", labels).unwrap();
        assert_eq!(ner.num_classes(), 5);
        assert_eq!(tc.num_classes(), 2);
        assert_eq!(ner.label_index("location"), Some(1));
        assert_eq!(ner.label_index("city"), None);
    }
}
