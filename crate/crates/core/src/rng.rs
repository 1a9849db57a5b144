//! Seeded random streams.
//!
//! Every stochastic component draws from its own ChaCha stream derived from
//! the run seed, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream ids for the independent consumers of one run seed.
pub mod streams {
    pub const SCENARIOS: u64 = 1;
    /// Fleet streams are `FLEET_BASE + microgrid * FLEET_STRIDE + ev`.
    pub const FLEET_BASE: u64 = 1 << 20;
    pub const FLEET_STRIDE: u64 = 1 << 16;
    /// GA streams are `GA_BASE + microgrid`.
    pub const GA_BASE: u64 = 1 << 40;
}

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
