use alloc::string::String;
use alloc::vec::Vec;

use crate::generation::ParseStats;

use super::config::PipelineConfig;

/// Wall-clock source for stage timings. The core has no clock of its own;
/// callers supply one (the CLI uses the system clock, tests use
/// [`NullClock`]).
pub trait Clock {
    fn now_ms(&mut self) -> u64;
}

/// Clock that always reads zero; timings become zeros.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_ms(&mut self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub select_ms: u64,
    pub seed_gen_ms: u64,
    pub index_ms: u64,
    pub retrieval_gen_ms: u64,
    pub merge_ms: u64,
}

/// Outcome of the seed-based generation stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedGenReport {
    pub calls: usize,
    pub stats: ParseStats,
    pub warning: Option<String>,
}

/// Outcome of one retrieval-generation round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundReport {
    pub round: usize,
    /// Entries returned by retrieval this round.
    pub retrieved: usize,
    /// Corpus positions used as prompt context.
    pub context_positions: Vec<usize>,
    pub requested: usize,
    /// Examples appended to B this round.
    pub kept: usize,
    pub stats: ParseStats,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProvenanceCounts {
    pub user: usize,
    pub seed_gen: usize,
    pub retrieval_gen: usize,
    pub corpus: usize,
}

/// Full account of one pipeline run, including the resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRunReport {
    pub config: PipelineConfig,
    pub seed_size: usize,
    pub a_size: usize,
    pub b_size: usize,
    pub x_size: usize,
    pub dedup_removed: usize,
    /// Raw retrieved sentences merged into X (only with `include_retrieved`).
    pub retrieved_included: usize,
    pub retrieved_dropped: usize,
    pub seed_gen: SeedGenReport,
    pub rounds: Vec<RoundReport>,
    pub timings: StageTimings,
    pub provenance: ProvenanceCounts,
}

impl PipelineRunReport {
    /// Count reconciliation: every input example is either in X or was
    /// removed as a duplicate.
    pub fn reconciles(&self) -> bool {
        let seed_contribution = if self.config.include_seeds {
            self.seed_size
        } else {
            0
        };
        self.x_size + self.dedup_removed
            == self.a_size + self.b_size + seed_contribution + self.retrieved_included
    }
}
