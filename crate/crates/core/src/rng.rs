//! Seeded random streams. All randomness in the crate flows from an explicit
//! `u64` seed through ChaCha8 (a counter-based generator), with independent
//! sub-streams selected by index so that, e.g., the graph of switching piece
//! `k` is reproducible without generating pieces `0..k` first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for `seed`, stream 0.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `seed`, independent stream `stream`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on the closed-open interval `[lo, hi)`; returns `lo` when the
/// interval is empty.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    lo + (hi - lo) * rng.random::<f64>()
}
