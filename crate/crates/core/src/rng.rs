//! Deterministic random streams derived from a master seed by a keyed hash path.
//!
//! A stream is identified by the master seed followed by `(label, index)`
//! pairs, e.g. `(seed, "replica", 3, "face", 17, "level", 2)`. The same path
//! always produces the same ChaCha stream regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// A fresh master seed from the operating system, for runs that were given none.
pub fn fresh_seed() -> u64 {
    rand::random()
}

/// Position in the stream tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
    path: Vec<(String, u64)>,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey {
            seed,
            path: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child key `self / label / index`.
    pub fn child(&self, label: &str, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push((label.to_owned(), index));
        StreamKey {
            seed: self.seed,
            path,
        }
    }

    pub fn replica(&self, r: u64) -> Self {
        self.child("replica", r)
    }

    fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"nclam-stream-v1");
        h.update(self.seed.to_le_bytes());
        for (label, idx) in &self.path {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
            h.update(idx.to_le_bytes());
        }
        let out = h.finalize();
        let mut bytes = [0u8; 32];
        bytes.copy_from_slice(&out);
        bytes
    }

    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::from_seed(self.digest())
    }
}
