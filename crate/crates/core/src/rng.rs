//! Counter-based random streams.
//!
//! Every Monte Carlo loop draws trajectory `i` from its own ChaCha stream
//! keyed by `(master seed, domain)` with stream number `i`. Results therefore
//! do not depend on how trajectories are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags separating independent uses of the same master seed.
pub mod domain {
    pub const WALK: u64 = 0x57414c4b;
    pub const STATIONARY: u64 = 0x53544154;
    pub const LYAPUNOV: u64 = 0x4c594150;
    pub const ENTROPY: u64 = 0x454e5452;
    pub const SBM: u64 = 0x53424d5f;
    pub const PROBE: u64 = 0x50524f42;
    pub const NEAR_IDENTITY: u64 = 0x4e454152;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream `index` of the generator keyed by `(master, domain)`.
pub fn stream(master: u64, domain: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(master ^ splitmix(domain)));
    rng.set_stream(index);
    rng
}
