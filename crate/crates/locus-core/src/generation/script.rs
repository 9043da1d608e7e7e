use alloc::string::String;
use alloc::vec::Vec;

use super::client::{ChatRequest, ChatTransport, TransportError};

/// In-memory transport replaying a scripted sequence of outcomes, keyed by
/// request index. The deterministic backbone of every offline test; the
/// file-backed equivalent for the CLI lives in the companion crate.
#[derive(Debug, Clone)]
pub struct ScriptedTransport {
    responses: Vec<Result<String, TransportError>>,
    calls: usize,
    sleeps: Vec<u64>,
    requests: Vec<String>,
}

impl ScriptedTransport {
    pub fn new(responses: Vec<Result<String, TransportError>>) -> Self {
        ScriptedTransport {
            responses,
            calls: 0,
            sleeps: Vec::new(),
            requests: Vec::new(),
        }
    }

    /// Convenience constructor when every call succeeds.
    pub fn from_texts(texts: Vec<String>) -> Self {
        ScriptedTransport::new(texts.into_iter().map(Ok).collect())
    }

    /// Number of send calls made so far.
    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Backoff delays requested between retries.
    pub fn sleeps(&self) -> &[u64] {
        &self.sleeps
    }

    /// The prompt text of every request, in call order.
    pub fn requests(&self) -> &[String] {
        &self.requests
    }
}

impl ChatTransport for ScriptedTransport {
    fn send(&mut self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        self.requests.push(String::from(request.prompt));
        let outcome = match self.responses.get(self.calls) {
            Some(outcome) => outcome.clone(),
            None => Err(TransportError::permanent(alloc::format!(
                "scripted transport exhausted after {} responses",
                self.responses.len()
            ))),
        };
        self.calls += 1;
        outcome
    }

    fn sleep(&mut self, ms: u64) {
        self.sleeps.push(ms);
    }
}
