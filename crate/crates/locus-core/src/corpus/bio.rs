use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::example::{EntitySpan, LabeledExample};
use super::schema::LabelSchema;
use super::text::char_slice;
use super::tokenize::Token;

/// Per-token tag. Label payloads are indices into the schema's label list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BioTag {
    Outside,
    Begin(usize),
    Inside(usize),
}

impl BioTag {
    /// Dense class id: O = 0, B-i = 1 + 2i, I-i = 2 + 2i.
    pub fn id(self) -> usize {
        match self {
            BioTag::Outside => 0,
            BioTag::Begin(i) => 1 + 2 * i,
            BioTag::Inside(i) => 2 + 2 * i,
        }
    }

    pub fn from_id(id: usize) -> BioTag {
        if id == 0 {
            BioTag::Outside
        } else if id % 2 == 1 {
            BioTag::Begin((id - 1) / 2)
        } else {
            BioTag::Inside((id - 2) / 2)
        }
    }

    pub fn name(self, schema: &LabelSchema) -> String {
        match self {
            BioTag::Outside => String::from("O"),
            BioTag::Begin(i) => format!("B-{}", schema.labels()[i].name),
            BioTag::Inside(i) => format!("I-{}", schema.labels()[i].name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BioError {
    #[error("span {start}..{end} ({label}) does not align with token boundaries")]
    Unalignable {
        start: usize,
        end: usize,
        label: String,
    },
    #[error("label {0:?} is not in the schema")]
    UnknownLabel(String),
}

/// Convert a valid NER example to one tag per token.
///
/// A span covering tokens `i..=j` yields `B` at `i` and `I` afterwards. A
/// span whose boundaries fall inside a token makes the whole example
/// unalignable; callers count and exclude such examples.
pub fn to_bio(ex: &LabeledExample, tokens: &[Token], schema: &LabelSchema) -> Result<Vec<BioTag>, BioError> {
    let mut tags = alloc::vec![BioTag::Outside; tokens.len()];
    let spans: &[EntitySpan] = ex.entities().unwrap_or(&[]);
    for span in spans {
        let label = schema
            .label_index(&span.label)
            .ok_or_else(|| BioError::UnknownLabel(span.label.clone()))?;
        let first = tokens.iter().position(|t| t.start == span.start);
        let last = tokens.iter().position(|t| t.end == span.end);
        match (first, last) {
            (Some(i), Some(j)) if i <= j => {
                tags[i] = BioTag::Begin(label);
                for tag in tags.iter_mut().take(j + 1).skip(i + 1) {
                    *tag = BioTag::Inside(label);
                }
            }
            _ => {
                return Err(BioError::Unalignable {
                    start: span.start,
                    end: span.end,
                    label: span.label.clone(),
                })
            }
        }
    }
    Ok(tags)
}

/// Decode tags back to spans. An `I-x` with no open `x` span is repaired to
/// a `B-x`, so any tag sequence decodes without error.
pub fn decode_bio(text: &str, tokens: &[Token], tags: &[BioTag], schema: &LabelSchema) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, usize, usize)> = None; // (label, start, end)
    let close = |open: &mut Option<(usize, usize, usize)>, spans: &mut Vec<EntitySpan>| {
        if let Some((label, start, end)) = open.take() {
            if let Some(mention) = char_slice(text, start, end) {
                spans.push(EntitySpan::new(start, end, schema.labels()[label].name.clone(), mention));
            }
        }
    };
    for (tok, tag) in tokens.iter().zip(tags.iter()) {
        match *tag {
            BioTag::Outside => close(&mut open, &mut spans),
            BioTag::Begin(label) => {
                close(&mut open, &mut spans);
                open = Some((label, tok.start, tok.end));
            }
            BioTag::Inside(label) => match open {
                Some((current, start, _)) if current == label => {
                    open = Some((label, start, tok.end));
                }
                _ => {
                    close(&mut open, &mut spans);
                    open = Some((label, tok.start, tok.end));
                }
            },
        }
    }
    close(&mut open, &mut spans);
    spans
}

/// Decode a sequence of dense tag ids into `(label, start_token,
/// end_token_exclusive)` triples, with the same repair rule as
/// [`decode_bio`]. Used where only token indices matter (dev metrics).
pub fn decode_tag_ids(ids: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, usize, usize)> = None;
    for (i, &id) in ids.iter().enumerate() {
        match BioTag::from_id(id) {
            BioTag::Outside => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
            }
            BioTag::Begin(label) => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
                open = Some((label, i, i + 1));
            }
            BioTag::Inside(label) => match open {
                Some((current, start, _)) if current == label => {
                    open = Some((label, start, i + 1));
                }
                _ => {
                    if let Some(span) = open.take() {
                        spans.push(span);
                    }
                    open = Some((label, i, i + 1));
                }
            },
        }
    }
    if let Some(span) = open.take() {
        spans.push(span);
    }
    spans
}
