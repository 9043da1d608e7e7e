//! Stable 64-bit hashing for vocabulary bucketing and seed derivation.
//!
//! FNV-1a is used everywhere a hash must stay identical across runs,
//! platforms and crate versions: token -> embedding seed, token -> vocab
//! bucket, and sweep cell seeds. Not a cryptographic hash.

/// FNV-1a over a byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive one seed from several components, order-sensitive.
pub fn seed_of(parts: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
