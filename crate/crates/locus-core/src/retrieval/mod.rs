//! Embedding-based retrieval over a universal corpus.
//!
//! Scoring is exact and exhaustive: at desk scale there is no need for
//! approximate neighbor structures, and exactness is what lets the oracle
//! tests pin the output down to the last bit. The [`Embedder`] trait is the
//! pluggable provider contract; [`HashEmbedder`] is the deterministic
//! offline reference implementation used throughout the test suite.

mod embed;
mod hash_embedder;
mod index;

pub use embed::{cosine_similarity, EmbedError, Embedder, EmbeddingVector, SimilarityError};
pub use hash_embedder::HashEmbedder;
pub use index::{
    build_index, retrieve_top_k, retrieve_top_k_excluding, IndexEntry, IndexError, RetrievalHit,
    RetrievalIndex, RetrieveError,
};
