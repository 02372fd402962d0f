//! Seeded random streams.
//!
//! Every random decision in the crate is drawn from an [`RngStream`], an
//! explicit `(seed, stream)` pair. Parallel code derives one stream per unit
//! of work (coordinate, chunk, trial) so the drawn values never depend on
//! which thread ran which unit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic source of randomness identified by a seed and a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Derive an independent child stream. The child's seed mixes the parent's
    /// seed and stream, so `a.child(i).child(j)` and `a.child(j).child(i)`
    /// differ.
    pub fn child(&self, id: u64) -> Self {
        let mixed = splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0xA076_1D64_78BD_642F)));
        Self {
            seed: mixed,
            stream: id,
        }
    }

    /// Child stream for a named phase of an algorithm.
    pub fn phase(&self, tag: &str) -> Self {
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        for b in tag.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        self.child(h)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
