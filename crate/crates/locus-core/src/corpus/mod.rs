//! Labeled datasets for NER and text classification.
//!
//! All character offsets in this module count Unicode scalar values, not
//! bytes, so multilingual inputs never split a character. Everything is a
//! pure function over immutable values.

mod bio;
mod example;
mod schema;
mod text;
mod tokenize;
mod validate;

pub use bio::{decode_bio, decode_tag_ids, to_bio, BioError, BioTag};
pub use example::{Annotation, Dataset, DatasetError, EntitySpan, LabeledExample, Provenance};
pub use schema::{Label, LabelSchema, SchemaError, TaskKind};
pub use text::{char_len, char_slice, normalized_text};
pub use tokenize::{tokenize, Token};
pub use validate::{validate_example, ValidationIssue, ValidationReport};
