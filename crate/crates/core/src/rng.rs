//! Seeded random streams.
//!
//! Every stochastic step draws from a [`SeedStream`] derived from a master
//! seed and a stable label (`"trial/17"`, `"attacker"`, a candidate id, ...).
//! Derivation is `SHA-256(parent key || 0x00 || label)`, and the generator
//! behind a stream is ChaCha8 keyed with those 32 bytes. Both are fixed
//! constants of this crate: a stored seed replays bit-identically, and the
//! result of parallel work never depends on which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator type produced by [`SeedStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeedStream {
    key: [u8; 32],
}

impl SeedStream {
    pub fn root(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"xvlab/root");
        hasher.update(seed.to_le_bytes());
        SeedStream {
            key: hasher.finalize().into(),
        }
    }

    /// Child stream for `label`. Distinct labels give independent streams.
    pub fn derive(&self, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update([0u8]);
        hasher.update(label.as_bytes());
        SeedStream {
            key: hasher.finalize().into(),
        }
    }

    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::from_seed(self.key)
    }
}
