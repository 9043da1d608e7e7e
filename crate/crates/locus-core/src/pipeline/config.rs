use alloc::string::String;

/// How duplicate texts are detected during the merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupKey {
    /// Byte-for-byte text equality.
    ExactText,
    /// Lowercased text with whitespace runs collapsed.
    NormalizedText,
}

/// Knobs for one pipeline run.
///
/// `n` seeds are sampled from the user data; seed-based generation grows set
/// A to `size_a`; then `rounds` rounds each retrieve `k` corpus entries,
/// put the top `m` into the prompt and request `s` new examples for set B.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub n: usize,
    pub size_a: usize,
    pub k: usize,
    pub m: usize,
    pub s: usize,
    pub rounds: usize,
    pub rng_seed: u64,
    /// Generated texts shorter than this many characters are dropped.
    pub min_text_len: usize,
    /// Examples requested per seed-based prompt.
    pub per_prompt: usize,
    /// Cap on seed-generation LLM calls; 0 means twice the minimum needed.
    pub attempt_cap: usize,
    pub dedup: DedupKey,
    /// Merge the seed set into the output alongside A and B.
    pub include_seeds: bool,
    /// Also merge raw retrieved corpus sentences into the output. Off by
    /// default: retrieved items normally serve as prompt context only.
    pub include_retrieved: bool,
    /// Sample seeds evenly across labels instead of uniformly.
    pub stratify_seeds: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n: 10,
            size_a: 30,
            k: 8,
            m: 4,
            s: 10,
            rounds: 3,
            rng_seed: 42,
            min_text_len: 20,
            per_prompt: 10,
            attempt_cap: 0,
            dedup: DedupKey::ExactText,
            include_seeds: true,
            include_retrieved: false,
            stratify_seeds: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err(String::from("n must be at least 1"));
        }
        if self.m == 0 {
            return Err(String::from("m must be at least 1"));
        }
        if self.k < self.m {
            return Err(String::from("k must be at least m"));
        }
        if self.s == 0 {
            return Err(String::from("s must be at least 1"));
        }
        if self.per_prompt == 0 {
            return Err(String::from("per_prompt must be at least 1"));
        }
        Ok(())
    }

    /// Seed-generation call budget: explicit cap, or twice the minimum
    /// number of prompts that could reach `size_a`.
    pub fn resolved_attempt_cap(&self) -> usize {
        if self.attempt_cap > 0 {
            return self.attempt_cap;
        }
        2 * self.size_a.div_ceil(self.per_prompt).max(1)
    }
}
