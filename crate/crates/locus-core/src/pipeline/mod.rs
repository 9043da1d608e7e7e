//! End-to-end orchestration: seed selection, seed-based generation of A,
//! iterative retrieval-based generation of B, and the merge into X.
//!
//! Every stage is deterministic for a fixed RNG seed, embedder and
//! transport, so two identical runs produce identical output datasets. LLM
//! trouble inside a stage degrades gracefully (recorded and skipped);
//! credential failures and embedder mismatches abort the run.

mod config;
mod report;

pub use config::{DedupKey, PipelineConfig};
pub use report::{
    Clock, NullClock, PipelineRunReport, ProvenanceCounts, RoundReport, SeedGenReport,
    StageTimings,
};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{normalized_text, Annotation, Dataset, LabeledExample, Provenance};
use crate::generation::{
    build_retrieval_prompt, build_seed_prompt, parse_generation, ChatTransport, CompleteError,
    LlmClient, ParseStats, PromptError,
};
use crate::retrieval::{
    build_index, retrieve_top_k_excluding, Embedder, IndexError, RetrievalIndex, RetrieveError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("user dataset is empty")]
    EmptyUserData,
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("datasets have different schemas")]
    SchemaMismatch,
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Retrieve(#[from] RetrieveError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("generation aborted: {0}")]
    Generation(String),
}

/// Uniform sample of `min(n, |d_user|)` examples without replacement.
///
/// With stratification, examples are grouped by label (class for TC, first
/// span's label for NER) and drawn round-robin so per-label counts differ by
/// at most one where supply allows.
pub fn select_seeds(
    d_user: &Dataset,
    n: usize,
    rng_seed: u64,
    stratify: bool,
) -> Result<Dataset, PipelineError> {
    if d_user.is_empty() {
        return Err(PipelineError::EmptyUserData);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let take = n.min(d_user.len());

    let chosen: Vec<usize> = if stratify {
        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, ex) in d_user.iter().enumerate() {
            let key = match &ex.annotation {
                Annotation::Class(label) => label.clone(),
                Annotation::Entities(spans) => spans
                    .first()
                    .map(|s| s.label.clone())
                    .unwrap_or_default(),
            };
            groups.entry(key).or_default().push(i);
        }
        let mut queues: Vec<Vec<usize>> = groups.into_values().collect();
        for queue in queues.iter_mut() {
            queue.shuffle(&mut rng);
        }
        let mut chosen = Vec::with_capacity(take);
        while chosen.len() < take {
            let mut progressed = false;
            for queue in queues.iter_mut() {
                if chosen.len() >= take {
                    break;
                }
                if let Some(i) = queue.pop() {
                    chosen.push(i);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        chosen
    } else {
        let mut indices: Vec<usize> = (0..d_user.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(take);
        indices
    };

    let examples = chosen
        .iter()
        .map(|&i| d_user.examples()[i].clone())
        .collect();
    Ok(Dataset::new(d_user.schema().clone(), examples).expect("subset of a valid dataset"))
}

/// Seed-based generation: issue prompts until `size_a` validated examples
/// are collected or the attempt cap is hit. A short result is a warning in
/// the report, not a failure.
pub fn generate_seed_batch<T: ChatTransport>(
    seeds: &Dataset,
    client: &mut LlmClient<T>,
    size_a: usize,
    per_prompt: usize,
    min_text_len: usize,
    attempt_cap: usize,
) -> Result<(Dataset, SeedGenReport), PipelineError> {
    let schema = seeds.schema().clone();
    let mut examples: Vec<LabeledExample> = Vec::with_capacity(size_a);
    let mut report = SeedGenReport::default();

    while examples.len() < size_a && report.calls < attempt_cap {
        let prompt = build_seed_prompt(&schema, seeds.examples(), per_prompt)?;
        report.calls += 1;
        match client.complete(&prompt) {
            Ok(raw) => {
                let batch = parse_generation(&raw, &schema, Provenance::SeedGen, min_text_len);
                report.stats.merge(&batch.stats);
                examples.extend(batch.examples);
            }
            Err(CompleteError::NonRetriable(message)) => {
                return Err(PipelineError::Generation(message));
            }
            Err(CompleteError::Exhausted { attempts, last }) => {
                report.warning = Some(alloc::format!(
                    "seed-generation call {} failed after {attempts} attempts: {last}",
                    report.calls
                ));
            }
        }
    }
    examples.truncate(size_a);
    if examples.len() < size_a {
        report.warning = Some(alloc::format!(
            "seed generation produced {} of {} requested examples in {} calls",
            examples.len(),
            size_a,
            report.calls
        ));
    }
    let dataset = Dataset::new(schema, examples).expect("parsed examples are validated");
    Ok((dataset, report))
}

/// The iterative retrieval-generation loop building set B.
///
/// Each round retrieves top-k against the fixed seed set, excluding corpus
/// entries already spent as context in earlier rounds, prompts with the top
/// m and keeps at most `s` parsed examples. A round whose LLM call exhausts
/// its retries is recorded and skipped.
pub fn iterative_retrieval_generation<T: ChatTransport>(
    seeds: &Dataset,
    index: &RetrievalIndex,
    client: &mut LlmClient<T>,
    embedder: &dyn Embedder,
    cfg: &PipelineConfig,
) -> Result<(Dataset, Vec<RoundReport>, Vec<LabeledExample>), PipelineError> {
    let schema = seeds.schema().clone();
    let mut examples: Vec<LabeledExample> = Vec::new();
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut used = BTreeSet::new();
    let mut context_examples = Vec::new();

    for round in 0..cfg.rounds {
        let hits = retrieve_top_k_excluding(index, seeds, cfg.k, embedder, &used)?;
        if hits.is_empty() {
            rounds.push(RoundReport {
                round,
                retrieved: 0,
                context_positions: Vec::new(),
                requested: cfg.s,
                kept: 0,
                stats: ParseStats::default(),
                error: Some(String::from("corpus exhausted: no entries left to retrieve")),
            });
            continue;
        }
        let m_eff = cfg.m.min(hits.len());
        let context_positions: Vec<usize> =
            hits[..m_eff].iter().map(|h| h.corpus_position).collect();
        for hit in &hits[..m_eff] {
            used.insert(hit.corpus_position);
            context_examples.push(hit.example.clone());
        }
        let prompt = build_retrieval_prompt(&schema, seeds.examples(), &hits, m_eff, cfg.s)?;
        match client.complete(&prompt) {
            Ok(raw) => {
                let batch =
                    parse_generation(&raw, &schema, Provenance::RetrievalGen, cfg.min_text_len);
                let mut kept = batch.examples;
                kept.truncate(cfg.s);
                rounds.push(RoundReport {
                    round,
                    retrieved: hits.len(),
                    context_positions,
                    requested: cfg.s,
                    kept: kept.len(),
                    stats: batch.stats,
                    error: None,
                });
                examples.extend(kept);
            }
            Err(CompleteError::NonRetriable(message)) => {
                return Err(PipelineError::Generation(message));
            }
            Err(CompleteError::Exhausted { attempts, last }) => {
                rounds.push(RoundReport {
                    round,
                    retrieved: hits.len(),
                    context_positions,
                    requested: cfg.s,
                    kept: 0,
                    stats: ParseStats::default(),
                    error: Some(alloc::format!(
                        "generation failed after {attempts} attempts: {last}"
                    )),
                });
            }
        }
    }

    let dataset = Dataset::new(schema, examples).expect("parsed examples are validated");
    Ok((dataset, rounds, context_examples))
}

/// Concatenate datasets in order, dropping duplicate texts by the chosen
/// key. The first occurrence wins.
pub fn merge_datasets(
    parts: &[&Dataset],
    dedup: DedupKey,
) -> Result<(Dataset, usize), PipelineError> {
    let Some(first) = parts.first() else {
        return Err(PipelineError::SchemaMismatch);
    };
    let schema = first.schema().clone();
    if parts.iter().any(|p| p.schema() != &schema) {
        return Err(PipelineError::SchemaMismatch);
    }

    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut merged = Vec::new();
    let mut removed = 0usize;
    for part in parts {
        for ex in part.iter() {
            let key = match dedup {
                DedupKey::ExactText => ex.text.clone(),
                DedupKey::NormalizedText => normalized_text(&ex.text),
            };
            if seen.insert(key) {
                merged.push(ex.clone());
            } else {
                removed += 1;
            }
        }
    }
    let dataset = Dataset::new(schema, merged).expect("merged parts were already valid");
    Ok((dataset, removed))
}

fn count_provenance(dataset: &Dataset) -> ProvenanceCounts {
    let mut counts = ProvenanceCounts::default();
    for ex in dataset.iter() {
        match ex.provenance {
            Provenance::User => counts.user += 1,
            Provenance::SeedGen => counts.seed_gen += 1,
            Provenance::RetrievalGen => counts.retrieval_gen += 1,
            Provenance::Corpus => counts.corpus += 1,
        }
    }
    counts
}

/// Run the full pipeline, building the retrieval index from `corpus` when
/// retrieval rounds are configured.
pub fn run_pipeline<T: ChatTransport>(
    d_user: &Dataset,
    corpus: &Dataset,
    cfg: &PipelineConfig,
    client: &mut LlmClient<T>,
    embedder: &dyn Embedder,
    clock: &mut dyn Clock,
) -> Result<(Dataset, PipelineRunReport), PipelineError> {
    cfg.validate().map_err(PipelineError::InvalidConfig)?;
    if cfg.rounds == 0 {
        return run_pipeline_stages(d_user, None, cfg, client, embedder, clock, 0);
    }
    let t0 = clock.now_ms();
    let index = build_index(corpus, embedder)?;
    let index_ms = clock.now_ms().saturating_sub(t0);
    run_pipeline_stages(d_user, Some(&index), cfg, client, embedder, clock, index_ms)
}

/// Run the full pipeline against a prebuilt retrieval index.
pub fn run_pipeline_with_index<T: ChatTransport>(
    d_user: &Dataset,
    index: &RetrievalIndex,
    cfg: &PipelineConfig,
    client: &mut LlmClient<T>,
    embedder: &dyn Embedder,
    clock: &mut dyn Clock,
) -> Result<(Dataset, PipelineRunReport), PipelineError> {
    cfg.validate().map_err(PipelineError::InvalidConfig)?;
    run_pipeline_stages(d_user, Some(index), cfg, client, embedder, clock, 0)
}

#[allow(clippy::too_many_arguments)]
fn run_pipeline_stages<T: ChatTransport>(
    d_user: &Dataset,
    index: Option<&RetrievalIndex>,
    cfg: &PipelineConfig,
    client: &mut LlmClient<T>,
    embedder: &dyn Embedder,
    clock: &mut dyn Clock,
    index_ms: u64,
) -> Result<(Dataset, PipelineRunReport), PipelineError> {
    let schema = d_user.schema().clone();
    let mut timings = StageTimings {
        index_ms,
        ..StageTimings::default()
    };

    let t = clock.now_ms();
    let seeds = select_seeds(d_user, cfg.n, cfg.rng_seed, cfg.stratify_seeds)?;
    timings.select_ms = clock.now_ms().saturating_sub(t);

    let t = clock.now_ms();
    let (set_a, seed_gen) = generate_seed_batch(
        &seeds,
        client,
        cfg.size_a,
        cfg.per_prompt,
        cfg.min_text_len,
        cfg.resolved_attempt_cap(),
    )?;
    timings.seed_gen_ms = clock.now_ms().saturating_sub(t);

    let t = clock.now_ms();
    let (set_b, rounds, context_examples) = match (cfg.rounds, index) {
        (0, _) | (_, None) => (Dataset::empty(schema.clone()), Vec::new(), Vec::new()),
        (_, Some(index)) => {
            iterative_retrieval_generation(&seeds, index, client, embedder, cfg)?
        }
    };
    timings.retrieval_gen_ms = clock.now_ms().saturating_sub(t);

    let t = clock.now_ms();
    let mut retrieved_included = 0usize;
    let mut retrieved_dropped = 0usize;
    let retrieved_set = if cfg.include_retrieved {
        let mut ds = Dataset::empty(schema.clone());
        for mut ex in context_examples {
            ex.provenance = Provenance::Corpus;
            match ds.push(ex) {
                Ok(()) => retrieved_included += 1,
                Err(_) => retrieved_dropped += 1,
            }
        }
        Some(ds)
    } else {
        None
    };

    let mut parts: Vec<&Dataset> = alloc::vec![&set_a, &set_b];
    if cfg.include_seeds {
        parts.push(&seeds);
    }
    if let Some(retrieved) = retrieved_set.as_ref() {
        parts.push(retrieved);
    }
    let (merged, dedup_removed) = merge_datasets(&parts, cfg.dedup)?;
    timings.merge_ms = clock.now_ms().saturating_sub(t);

    let report = PipelineRunReport {
        config: cfg.clone(),
        seed_size: seeds.len(),
        a_size: set_a.len(),
        b_size: set_b.len(),
        x_size: merged.len(),
        dedup_removed,
        retrieved_included,
        retrieved_dropped,
        seed_gen,
        rounds,
        timings,
        provenance: count_provenance(&merged),
    };
    Ok((merged, report))
}
