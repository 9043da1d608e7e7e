//! Synthetic example generation through an LLM.
//!
//! Prompts come in two flavors: seed-based (only the user's seed examples
//! and the label inventory) and retrieval-based (the same plus top-m corpus
//! sentences as context). Responses are plain text in a fixed
//! `Text:`/`Entities:` (or `Label:`) block format; parsing is total and
//! turns every malformed piece into a counter instead of an error.

mod client;
mod parse;
mod prompt;
mod script;

pub use client::{
    AuditRecord, BackoffSchedule, ChatRequest, ChatTransport, CompleteError, LlmClient,
    LlmClientConfig, TransportError,
};
pub use parse::{align_entities, parse_generation, GenerationBatch, ParseStats};
pub use prompt::{build_retrieval_prompt, build_seed_prompt, render_example, MetaPrompt, PromptError, PromptKind};
pub use script::ScriptedTransport;
