use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::example::{Annotation, LabeledExample};
use super::schema::{LabelSchema, TaskKind};
use super::text::{char_len, char_slice};

/// One violated invariant. The `Display` text is what error reports carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    EmptyText,
    AnnotationMismatch { expected: TaskKind },
    OffsetOutOfBounds { start: usize, end: usize, text_len: usize },
    EmptySpan { start: usize, end: usize },
    MentionMismatch { expected: String, found: String },
    UnknownLabel(String),
    OverlappingSpans { first: (usize, usize), second: (usize, usize) },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::EmptyText => write!(f, "text is empty"),
            ValidationIssue::AnnotationMismatch { expected } => {
                let want = match expected {
                    TaskKind::Ner => "entity spans",
                    TaskKind::Tc => "a class label",
                };
                write!(f, "annotation does not match task: expected {want}")
            }
            ValidationIssue::OffsetOutOfBounds { start, end, text_len } => write!(
                f,
                "offset out of bounds: span {start}..{end} exceeds text length {text_len}"
            ),
            ValidationIssue::EmptySpan { start, end } => {
                write!(f, "empty or inverted span {start}..{end}")
            }
            ValidationIssue::MentionMismatch { expected, found } => write!(
                f,
                "mention mismatch: text slice is {expected:?} but span carries {found:?}"
            ),
            ValidationIssue::UnknownLabel(label) => write!(f, "unknown label {label:?}"),
            ValidationIssue::OverlappingSpans { first, second } => write!(
                f,
                "overlapping spans {}..{} and {}..{}",
                first.0, first.1, second.0, second.1
            ),
        }
    }
}

/// Every invariant an example violates; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Check one example against a schema. Validation never fails; it reports.
pub fn validate_example(ex: &LabeledExample, schema: &LabelSchema) -> ValidationReport {
    let mut report = ValidationReport::default();
    let text_len = char_len(&ex.text);
    if text_len == 0 {
        report.issues.push(ValidationIssue::EmptyText);
    }

    match (&ex.annotation, schema.task()) {
        (Annotation::Entities(spans), TaskKind::Ner) => {
            for span in spans.iter() {
                if span.start >= span.end {
                    report.issues.push(ValidationIssue::EmptySpan {
                        start: span.start,
                        end: span.end,
                    });
                    continue;
                }
                if span.end > text_len {
                    report.issues.push(ValidationIssue::OffsetOutOfBounds {
                        start: span.start,
                        end: span.end,
                        text_len,
                    });
                } else if let Some(slice) = char_slice(&ex.text, span.start, span.end) {
                    if slice != span.mention {
                        report.issues.push(ValidationIssue::MentionMismatch {
                            expected: slice,
                            found: span.mention.clone(),
                        });
                    }
                }
                if !schema.contains(&span.label) {
                    report
                        .issues
                        .push(ValidationIssue::UnknownLabel(span.label.clone()));
                }
            }
            for (i, a) in spans.iter().enumerate() {
                for b in spans.iter().skip(i + 1) {
                    if a.overlaps(b) {
                        report.issues.push(ValidationIssue::OverlappingSpans {
                            first: (a.start, a.end),
                            second: (b.start, b.end),
                        });
                    }
                }
            }
        }
        (Annotation::Class(label), TaskKind::Tc) => {
            if !schema.contains(label) {
                report
                    .issues
                    .push(ValidationIssue::UnknownLabel(label.clone()));
            }
        }
        (_, expected) => {
            report
                .issues
                .push(ValidationIssue::AnnotationMismatch { expected });
        }
    }
    report
}
