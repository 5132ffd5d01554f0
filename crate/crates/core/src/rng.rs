//! Reproducible random streams.
//!
//! Every stochastic quantity in the simulator is drawn from a counter-based
//! ChaCha stream addressed by (seed, stream id), so independent pieces of a
//! run (channel, propagation noise, device noise, parallel trials) can be
//! given disjoint streams and any run is reproducible from its seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// Well-known stream ids used by `run_link`. Trial-level code offsets from
/// [`TRIAL_BASE`] so per-trial streams never collide with the fixed ones.
pub mod stream_id {
    pub const CHANNEL: u64 = 1;
    pub const PROPAGATION_NOISE: u64 = 2;
    pub const PILOT_NOISE: u64 = 3;
    pub const DEVICE: u64 = 4;
    pub const TRIAL_BASE: u64 = 1 << 32;
}

/// Dedicated stream `id` of the generator family selected by `seed`.
pub fn stream(seed: u64, id: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
