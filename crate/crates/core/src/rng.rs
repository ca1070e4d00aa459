//! Seed plumbing.
//!
//! Benchmark parameters come from [`SplitMix64`] so that any implementation
//! can regenerate the same angles: the state advances by the golden-ratio
//! increment `0x9E3779B97F4A7C15` and each output is mixed with the
//! `splitmix64` finalizer (shifts 30/27/31, multipliers `0xBF58476D1CE4E5B9`
//! and `0x94D049BB133111EB`). Uniform reals take the top 53 bits.
//!
//! Search heuristics (annealing, SABRE trials) use ChaCha8 seeded through
//! [`derive_seed`]; their streams are reproducible but not part of any
//! interchange format.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Version tag recorded next to generated parameters.
pub const SPLITMIX_VERSION: &str = "splitmix64-v1";

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Mixes a parent seed with a stream index into an independent child seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut sm = SplitMix64::new(seed ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    sm.next_u64()
}

pub(crate) fn chacha(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}
