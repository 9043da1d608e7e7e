use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hashing::fnv1a64;

use super::embed::{EmbedError, Embedder, EmbeddingVector};

/// Deterministic offline embedder for tests and fixtures.
///
/// Each lowercased token maps to a pseudo-random unit vector whose RNG seed
/// is a stable hash of the token; the sentence vector is the normalized sum
/// of its token vectors. Distinct texts therefore get distinct directions
/// while sharing tokens still moves sentences closer together, which gives
/// the similarity structure the retrieval tests need without any network or
/// model weights.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "embedding dimension must be positive");
        HashEmbedder { dim }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let lower = token.to_lowercase();
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(lower.as_bytes()));
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 0.0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
        } else {
            v[0] = 1.0;
        }
        v
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(64)
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> String {
        format!("hash-v1/dim={}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut sum = alloc::vec![0.0f64; self.dim];
        let mut tokens = 0usize;
        for token in text.split_whitespace() {
            tokens += 1;
            for (acc, x) in sum.iter_mut().zip(self.token_vector(token)) {
                *acc += x;
            }
        }
        if tokens == 0 {
            // Whitespace-only text: fall back to the empty-token direction.
            sum = self.token_vector("");
        }
        let norm = libm::sqrt(sum.iter().map(|x| x * x).sum::<f64>());
        if norm > 0.0 {
            for x in sum.iter_mut() {
                *x /= norm;
            }
        } else {
            sum[0] = 1.0;
        }
        EmbeddingVector::new(sum.into_iter().map(|x| x as f32).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::embed::cosine_similarity;

    #[test]
    fn embedding_is_deterministic() {
        let e = HashEmbedder::new(32);
        let a = e.embed("john lives in paris").unwrap();
        let b = e.embed("john lives in paris").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_is_unit_norm() {
        let e = HashEmbedder::default();
        for text in ["any text", "a", "one two three four five", "  spaced  "] {
            let v = e.embed(text).unwrap();
            assert!((v.l2_norm() - 1.0).abs() < 1e-6, "norm for {text:?}");
        }
    }

    #[test]
    fn distinct_strings_are_not_parallel() {
        let e = HashEmbedder::default();
        let a = e.embed("red bicycles downtown").unwrap();
        let b = e.embed("quantum chromodynamics lecture").unwrap();
        let cos = cosine_similarity(&a, &b).unwrap();
        assert!(cos < 1.0 - 1e-6, "cosine was {cos}");
    }

    #[test]
    fn shared_tokens_increase_similarity() {
        let e = HashEmbedder::default();
        let base = e.embed("the red fox jumped").unwrap();
        let near = e.embed("the red fox slept").unwrap();
        let far = e.embed("submarine cable outage").unwrap();
        let near_cos = cosine_similarity(&base, &near).unwrap();
        let far_cos = cosine_similarity(&base, &far).unwrap();
        assert!(near_cos > far_cos);
    }

    #[test]
    fn casing_does_not_change_the_vector() {
        let e = HashEmbedder::default();
        assert_eq!(e.embed("Paris Hotel").unwrap(), e.embed("paris hotel").unwrap());
    }
}
