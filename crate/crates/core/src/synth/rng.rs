use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Independent RNG stream for `(seed, key, op)`.
///
/// Streams depend only on their inputs, so a patient generates the same
/// way whatever the cohort size or worker scheduling.
pub fn stream(seed: u64, key: &str, op: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((key.len() as u64).to_le_bytes());
    h.update(key.as_bytes());
    h.update((op.len() as u64).to_le_bytes());
    h.update(op.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}
