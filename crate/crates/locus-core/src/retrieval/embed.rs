use alloc::string::String;
use alloc::vec::Vec;

/// A fixed-length embedding. Stored components are `f32` (matching the
/// on-disk index format); similarity math runs in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbedError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(EmbeddingVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn l2_norm(&self) -> f64 {
        let mut sum = 0.0f64;
        for &v in &self.values {
            let v = f64::from(v);
            sum += v * v;
        }
        libm::sqrt(sum)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("embedding provider failed ({}): {message}", if *.retriable { "retriable" } else { "permanent" })]
    Provider { retriable: bool, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimilarityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("cosine similarity of a zero vector is undefined")]
    ZeroVector,
}

/// Cosine of the angle between two vectors, in `[-1, 1]` up to rounding.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimilarityError> {
    if a.dim() != b.dim() {
        return Err(SimilarityError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (&x, &y) in a.values().iter().zip(b.values().iter()) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok(dot / (libm::sqrt(norm_a) * libm::sqrt(norm_b)))
}

/// Pluggable sentence-embedding provider.
///
/// Implementations must be deterministic for a fixed `id()`: the same text
/// always maps to the same L2-normalized vector. The id names the provider
/// and its parameters so an index can reject queries from a different
/// embedder.
pub trait Embedder {
    fn id(&self) -> String;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn vector(values: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn cosine_identity_and_orthogonality() {
        let v = vector(&[0.6, 0.8]);
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let x = vector(&[1.0, 0.0]);
        let y = vector(&[0.0, 1.0]);
        assert_eq!(cosine_similarity(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn cosine_of_diagonal_pair_is_inverse_sqrt_two() {
        let a = vector(&[1.0, 1.0]);
        let b = vector(&[1.0, 0.0]);
        // Closed form: 1/sqrt(2).
        assert!((cosine_similarity(&a, &b).unwrap() - 0.7071).abs() < 1e-4);
    }

    #[test]
    fn cosine_rejects_mismatch_and_zero() {
        let a = vector(&[1.0, 0.0]);
        let b = vector(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            cosine_similarity(&a, &b),
            Err(SimilarityError::DimMismatch { left: 2, right: 3 })
        ));
        let z = vector(&[0.0, 0.0]);
        assert_eq!(cosine_similarity(&a, &z), Err(SimilarityError::ZeroVector));
    }

    #[test]
    fn non_finite_components_are_rejected() {
        assert_eq!(
            EmbeddingVector::new(vec![0.0, f32::NAN]),
            Err(EmbedError::NonFinite)
        );
    }
}
