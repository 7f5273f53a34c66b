//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! 64-bit seed is a pure function of `(master seed, purpose tag, index)`.
//! The tag is hashed with FNV-1a and the three values are combined with the
//! SplitMix64 finalizer, so streams are portable across platforms and do not
//! depend on thread scheduling: bootstrap replicate `k` always sees the same
//! numbers whether replicates run serially or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for all sampling.
pub type StreamRng = ChaCha8Rng;

/// Purpose tags for derived streams.
pub mod purpose {
    pub const GRAPH: &str = "graph-sample";
    pub const DATA: &str = "data-graph";
    pub const TRUTH: &str = "truth-sample";
    pub const REPLICATE: &str = "bootstrap-replicate";
    pub const FIT_RESTART: &str = "histogram-restart";
    pub const MONTE_CARLO: &str = "monte-carlo";
    pub const REPLICATION: &str = "replication";
    pub const SIMULATION: &str = "simulation";
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(tag: &str) -> u64 {
    tag.bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream identified by `(master, purpose, index)`.
pub fn derive_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let a = splitmix64(master ^ fnv1a(purpose));
    splitmix64(a ^ splitmix64(index.wrapping_add(0x6a09_e667_f3bc_c909)))
}

/// Stream identified by `(master, purpose, index)`.
pub fn stream(master: u64, purpose: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, purpose, index))
}

/// Stream seeded directly from a seed value.
pub fn from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
