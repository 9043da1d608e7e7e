use alloc::string::String;
use alloc::vec::Vec;

use super::prompt::MetaPrompt;

/// Exponential backoff between retried LLM calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffSchedule {
    pub initial_ms: u64,
    pub multiplier: f64,
    pub max_ms: u64,
}

impl BackoffSchedule {
    /// Delay before retry number `attempt` (0-based).
    pub fn delay_ms(&self, attempt: u32) -> u64 {
        let mut delay = self.initial_ms as f64;
        for _ in 0..attempt {
            delay *= self.multiplier;
        }
        (delay as u64).min(self.max_ms)
    }
}

impl Default for BackoffSchedule {
    fn default() -> Self {
        BackoffSchedule {
            initial_ms: 500,
            multiplier: 2.0,
            max_ms: 30_000,
        }
    }
}

/// Client-side generation settings. Endpoint and credentials belong to the
/// transport, not here.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmClientConfig {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_retries: u32,
    pub backoff: BackoffSchedule,
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        LlmClientConfig {
            model_name: String::from("gpt-4o"),
            // High temperature by default: generation is asked for a diverse
            // dataset, not a single best answer.
            temperature: 1.0,
            max_tokens: 2048,
            max_retries: 3,
            backoff: BackoffSchedule::default(),
        }
    }
}

/// One chat-completion request, transport-agnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest<'a> {
    pub model: &'a str,
    pub prompt: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
}

/// A transport failure. Non-retriable errors (bad credentials, malformed
/// response) abort immediately; retriable ones go through backoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError {
    pub retriable: bool,
    pub message: String,
}

impl TransportError {
    pub fn retriable(message: impl Into<String>) -> Self {
        TransportError {
            retriable: true,
            message: message.into(),
        }
    }

    pub fn permanent(message: impl Into<String>) -> Self {
        TransportError {
            retriable: false,
            message: message.into(),
        }
    }
}

/// Something that can answer a chat request with raw response text.
///
/// `sleep` is the backoff hook; transports without a clock (mocks) keep the
/// default no-op so tests run instantly.
pub trait ChatTransport {
    fn send(&mut self, request: &ChatRequest<'_>) -> Result<String, TransportError>;

    fn sleep(&mut self, _ms: u64) {}
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompleteError {
    #[error("generation failed after {attempts} attempts, last error: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("generation failed: {0}")]
    NonRetriable(String),
}

/// Audit trail entry for one `complete` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRecord {
    pub request: String,
    pub response: Option<String>,
    pub retries: u32,
    pub error: Option<String>,
}

/// Retrying LLM client over a pluggable transport.
#[derive(Debug)]
pub struct LlmClient<T: ChatTransport> {
    config: LlmClientConfig,
    transport: T,
    audit: Vec<AuditRecord>,
}

impl<T: ChatTransport> LlmClient<T> {
    pub fn new(config: LlmClientConfig, transport: T) -> Self {
        LlmClient {
            config,
            transport,
            audit: Vec::new(),
        }
    }

    pub fn config(&self) -> &LlmClientConfig {
        &self.config
    }

    /// Every request/response seen so far, in call order.
    pub fn audit(&self) -> &[AuditRecord] {
        &self.audit
    }

    pub fn into_transport(self) -> T {
        self.transport
    }

    /// Send a prompt, retrying transient failures up to `max_retries` times
    /// with the configured backoff.
    pub fn complete(&mut self, prompt: &MetaPrompt) -> Result<String, CompleteError> {
        let request = ChatRequest {
            model: &self.config.model_name,
            prompt: &prompt.rendered_text,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let mut retries = 0u32;
        loop {
            match self.transport.send(&request) {
                Ok(response) => {
                    self.audit.push(AuditRecord {
                        request: prompt.rendered_text.clone(),
                        response: Some(response.clone()),
                        retries,
                        error: None,
                    });
                    return Ok(response);
                }
                Err(err) if !err.retriable => {
                    self.audit.push(AuditRecord {
                        request: prompt.rendered_text.clone(),
                        response: None,
                        retries,
                        error: Some(err.message.clone()),
                    });
                    return Err(CompleteError::NonRetriable(err.message));
                }
                Err(err) => {
                    if retries >= self.config.max_retries {
                        self.audit.push(AuditRecord {
                            request: prompt.rendered_text.clone(),
                            response: None,
                            retries,
                            error: Some(err.message.clone()),
                        });
                        return Err(CompleteError::Exhausted {
                            attempts: retries + 1,
                            last: err.message,
                        });
                    }
                    self.transport.sleep(self.config.backoff.delay_ms(retries));
                    retries += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::prompt::{MetaPrompt, PromptKind};
    use crate::generation::script::ScriptedTransport;
    use alloc::string::ToString;
    use alloc::vec;

    fn prompt() -> MetaPrompt {
        MetaPrompt {
            kind: PromptKind::SeedBased,
            rendered_text: "generate things".to_string(),
            requested_count: 1,
        }
    }

    #[test]
    fn canned_response_is_returned_verbatim() {
        let transport = ScriptedTransport::new(vec![Ok("canned output".to_string())]);
        let mut client = LlmClient::new(LlmClientConfig::default(), transport);
        assert_eq!(client.complete(&prompt()).unwrap(), "canned output");
        assert_eq!(client.audit().len(), 1);
        assert_eq!(client.audit()[0].retries, 0);
    }

    #[test]
    fn transient_failures_are_retried_and_counted() {
        let transport = ScriptedTransport::new(vec![
            Err(TransportError::retriable("hiccup one")),
            Err(TransportError::retriable("hiccup two")),
            Ok("finally".to_string()),
        ]);
        let mut client = LlmClient::new(LlmClientConfig::default(), transport);
        assert_eq!(client.complete(&prompt()).unwrap(), "finally");
        assert_eq!(client.audit()[0].retries, 2);
        let transport = client.into_transport();
        assert_eq!(transport.sleeps(), &[500, 1000]);
    }

    #[test]
    fn zero_retries_fails_on_first_error() {
        let transport = ScriptedTransport::new(vec![Err(TransportError::retriable("down"))]);
        let mut cfg = LlmClientConfig::default();
        cfg.max_retries = 0;
        let mut client = LlmClient::new(cfg, transport);
        assert_eq!(
            client.complete(&prompt()).unwrap_err(),
            CompleteError::Exhausted {
                attempts: 1,
                last: "down".to_string()
            }
        );
    }

    #[test]
    fn auth_failure_is_not_retried() {
        let transport = ScriptedTransport::new(vec![
            Err(TransportError::permanent("bad key")),
            Ok("never reached".to_string()),
        ]);
        let mut client = LlmClient::new(LlmClientConfig::default(), transport);
        assert_eq!(
            client.complete(&prompt()).unwrap_err(),
            CompleteError::NonRetriable("bad key".to_string())
        );
        let transport = client.into_transport();
        assert_eq!(transport.calls(), 1);
    }

    #[test]
    fn backoff_schedule_is_capped() {
        let schedule = BackoffSchedule {
            initial_ms: 100,
            multiplier: 10.0,
            max_ms: 5_000,
        };
        assert_eq!(schedule.delay_ms(0), 100);
        assert_eq!(schedule.delay_ms(1), 1_000);
        assert_eq!(schedule.delay_ms(2), 5_000);
        assert_eq!(schedule.delay_ms(3), 5_000);
    }
}
