//! Few-shot dataset expansion and compact model specialization.
//!
//! Starting from a handful of labeled examples, this crate builds NER and
//! text-classification training sets by combining seed-based LLM generation
//! with retrieval-based generation over an embedded universal corpus, then
//! specializes a compact model with either full-weight training or low-rank
//! adapters.
//!
//! The crate is `no_std` (alloc required). Anything that touches the outside
//! world is abstracted behind traits: [`retrieval::Embedder`] for sentence
//! embeddings, [`generation::ChatTransport`] for LLM calls and
//! [`pipeline::Clock`] for stage timings. File formats, HTTP, and the command
//! line live in the companion `locus-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod corpus;
pub mod eval;
pub mod generation;
pub mod hashing;
pub mod lora;
pub mod model;
pub mod pipeline;
pub mod retrieval;
