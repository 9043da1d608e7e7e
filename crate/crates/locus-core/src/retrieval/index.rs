use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{Dataset, LabeledExample};

use super::embed::{cosine_similarity, EmbedError, Embedder, EmbeddingVector};

/// One indexed corpus sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub position: usize,
    pub vector: EmbeddingVector,
    pub example: LabeledExample,
}

/// Immutable embedding index over a corpus, ordered by corpus position.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex {
    embedder_id: String,
    dim: usize,
    entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("embedding failed at corpus position {position} after {embedded} entries: {source}")]
    Embed {
        position: usize,
        embedded: usize,
        source: EmbedError,
    },
    #[error("entry {position} has dimension {found}, index has {expected}")]
    DimMismatch {
        position: usize,
        found: usize,
        expected: usize,
    },
    #[error("entries are not ordered by corpus position")]
    Unordered,
}

impl RetrievalIndex {
    /// Reassemble an index from stored parts, revalidating its invariants.
    pub fn from_parts(
        embedder_id: String,
        dim: usize,
        entries: Vec<IndexEntry>,
    ) -> Result<Self, IndexError> {
        for pair in entries.windows(2) {
            if pair[0].position >= pair[1].position {
                return Err(IndexError::Unordered);
            }
        }
        for entry in &entries {
            if entry.vector.dim() != dim {
                return Err(IndexError::DimMismatch {
                    position: entry.position,
                    found: entry.vector.dim(),
                    expected: dim,
                });
            }
        }
        Ok(RetrievalIndex {
            embedder_id,
            dim,
            entries,
        })
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Embed every corpus example, one entry per example in corpus order.
pub fn build_index(corpus: &Dataset, embedder: &dyn Embedder) -> Result<RetrievalIndex, IndexError> {
    if corpus.is_empty() {
        return Err(IndexError::EmptyCorpus);
    }
    let mut entries = Vec::with_capacity(corpus.len());
    for (position, example) in corpus.iter().enumerate() {
        let vector = embedder.embed(&example.text).map_err(|source| IndexError::Embed {
            position,
            embedded: entries.len(),
            source,
        })?;
        entries.push(IndexEntry {
            position,
            vector,
            example: example.clone(),
        });
    }
    Ok(RetrievalIndex {
        embedder_id: embedder.id(),
        dim: embedder.dim(),
        entries,
    })
}

/// A scored retrieval result.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalHit {
    pub corpus_position: usize,
    pub score: f64,
    pub example: LabeledExample,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrieveError {
    #[error("index was built with embedder {expected:?}, queried with {found:?}")]
    EmbedderMismatch { expected: String, found: String },
    #[error("k must be positive")]
    ZeroK,
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("failed to embed seed {index}: {source}")]
    SeedEmbed { index: usize, source: EmbedError },
}

/// Top-k corpus entries most similar to the seed set.
///
/// An entry's aggregated score is the maximum cosine similarity over all
/// seeds, so every seed's neighborhood stays represented. Results are sorted
/// by descending score with ties broken by ascending corpus position, and
/// exactly `min(k, index size)` hits are returned.
pub fn retrieve_top_k(
    index: &RetrievalIndex,
    seeds: &Dataset,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<RetrievalHit>, RetrieveError> {
    retrieve_top_k_excluding(index, seeds, k, embedder, &BTreeSet::new())
}

/// Same as [`retrieve_top_k`] but skipping the given corpus positions; used
/// by the pipeline so no corpus entry serves as prompt context twice.
pub fn retrieve_top_k_excluding(
    index: &RetrievalIndex,
    seeds: &Dataset,
    k: usize,
    embedder: &dyn Embedder,
    excluded: &BTreeSet<usize>,
) -> Result<Vec<RetrievalHit>, RetrieveError> {
    if k == 0 {
        return Err(RetrieveError::ZeroK);
    }
    if seeds.is_empty() {
        return Err(RetrieveError::EmptySeeds);
    }
    if embedder.id() != index.embedder_id {
        return Err(RetrieveError::EmbedderMismatch {
            expected: index.embedder_id.clone(),
            found: embedder.id(),
        });
    }

    let mut seed_vectors = Vec::with_capacity(seeds.len());
    for (i, seed) in seeds.iter().enumerate() {
        let v = embedder
            .embed(&seed.text)
            .map_err(|source| RetrieveError::SeedEmbed { index: i, source })?;
        seed_vectors.push(v);
    }

    let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(index.len());
    for (entry_idx, entry) in index.entries.iter().enumerate() {
        if excluded.contains(&entry.position) {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        for seed in &seed_vectors {
            // Dimensions were checked at build/load; zero vectors cannot
            // come out of a normalizing embedder.
            if let Ok(score) = cosine_similarity(seed, &entry.vector) {
                if score > best {
                    best = score;
                }
            }
        }
        scored.push((best, entry.position, entry_idx));
    }

    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    scored.truncate(k);

    Ok(scored
        .into_iter()
        .map(|(score, position, entry_idx)| RetrievalHit {
            corpus_position: position,
            score,
            example: index.entries[entry_idx].example.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, LabelSchema, Provenance, TaskKind};
    use crate::retrieval::hash_embedder::HashEmbedder;
    use alloc::format;
    use alloc::vec;

    fn tc_dataset(texts: &[&str]) -> Dataset {
        let schema = LabelSchema::new(TaskKind::Tc, "demo", vec![Label::new("x")]).unwrap();
        let examples = texts
            .iter()
            .map(|t| LabeledExample::tc(*t, "x", Provenance::Corpus))
            .collect();
        Dataset::new(schema, examples).unwrap()
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let schema = LabelSchema::new(TaskKind::Tc, "demo", vec![Label::new("x")]).unwrap();
        let corpus = Dataset::empty(schema);
        assert_eq!(
            build_index(&corpus, &HashEmbedder::default()).unwrap_err(),
            IndexError::EmptyCorpus
        );
    }

    #[test]
    fn index_preserves_corpus_order() {
        let corpus = tc_dataset(&[
            "alpha alert", "beta bulletin", "gamma gazette", "delta digest", "epsilon extra",
            "zeta zine", "eta editorial", "theta thread", "iota item", "kappa column",
        ]);
        let index = build_index(&corpus, &HashEmbedder::default()).unwrap();
        assert_eq!(index.len(), 10);
        for (i, entry) in index.entries().iter().enumerate() {
            assert_eq!(entry.position, i);
            assert_eq!(entry.example.text, corpus.examples()[i].text);
        }
    }

    #[test]
    fn identical_seed_ranks_first_with_unit_score() {
        let corpus = tc_dataset(&["red fox run", "blue whale swim", "green bird sing"]);
        let seeds = tc_dataset(&["blue whale swim"]);
        let embedder = HashEmbedder::default();
        let index = build_index(&corpus, &embedder).unwrap();
        let hits = retrieve_top_k(&index, &seeds, 2, &embedder).unwrap();
        assert_eq!(hits[0].corpus_position, 1);
        assert!((hits[0].score - 1.0).abs() < 1e-6);
    }

    #[test]
    fn k_larger_than_index_returns_everything_sorted() {
        let corpus = tc_dataset(&["one thing", "two things", "three things"]);
        let seeds = tc_dataset(&["two things maybe"]);
        let embedder = HashEmbedder::default();
        let index = build_index(&corpus, &embedder).unwrap();
        let hits = retrieve_top_k(&index, &seeds, 50, &embedder).unwrap();
        assert_eq!(hits.len(), 3);
        for pair in hits.windows(2) {
            assert!(pair[0].score >= pair[1].score);
        }
    }

    #[test]
    fn mismatched_embedder_is_rejected() {
        let corpus = tc_dataset(&["a b", "c d"]);
        let index = build_index(&corpus, &HashEmbedder::new(64)).unwrap();
        let err = retrieve_top_k(&index, &tc_dataset(&["a b"]), 1, &HashEmbedder::new(32)).unwrap_err();
        assert!(format!("{err}").contains("hash-v1/dim=32"));
    }

    #[test]
    fn zero_k_is_rejected() {
        let corpus = tc_dataset(&["a b", "c d"]);
        let embedder = HashEmbedder::default();
        let index = build_index(&corpus, &embedder).unwrap();
        assert_eq!(
            retrieve_top_k(&index, &tc_dataset(&["a b"]), 0, &embedder).unwrap_err(),
            RetrieveError::ZeroK
        );
    }

    #[test]
    fn exclusion_removes_entries_from_consideration() {
        let corpus = tc_dataset(&["red fox", "red fox den", "blue sea"]);
        let seeds = tc_dataset(&["red fox"]);
        let embedder = HashEmbedder::default();
        let index = build_index(&corpus, &embedder).unwrap();
        let mut excluded = BTreeSet::new();
        excluded.insert(0usize);
        let hits = retrieve_top_k_excluding(&index, &seeds, 3, &embedder, &excluded).unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits.iter().all(|h| h.corpus_position != 0));
    }
}
