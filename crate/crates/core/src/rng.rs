//! Counter-keyed random streams.
//!
//! Every random draw in a simulation comes from a ChaCha8 stream selected by
//! `(seed, trial, domain, index)`. A stream is consumed strictly in step
//! order, so the value at a given step depends only on the key and the step
//! index. Trials never share state, which is what lets serial and parallel
//! runs agree bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trial indices must fit below this bound.
pub const MAX_TRIALS: u64 = 1 << 40;
/// Stream indices within a domain must fit below this bound.
pub const MAX_INDEX: u32 = 1 << 20;

/// Independent families of streams within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    /// Environment noise observed by a sensor.
    Sensor = 0,
    /// Noise an attacker uses to fabricate its reported signal.
    Attacker = 1,
    /// Bridge sampling inside a continuous-time detector.
    Detector = 2,
    /// Renewal-constant estimation walks.
    Renewal = 3,
    /// Sampling outside any scheme (unit checks, single streams).
    Auxiliary = 4,
}

pub type StreamRng = ChaCha8Rng;

/// Opens the stream for `(seed, trial, domain, index)`.
pub fn stream(seed: u64, trial: u64, domain: Domain, index: u32) -> StreamRng {
    assert!(trial < MAX_TRIALS, "trial index {trial} out of range");
    assert!(index < MAX_INDEX, "stream index {index} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 24) | ((domain as u64) << 20) | index as u64);
    rng
}

/// SplitMix64 finalizer, used to derive sub-seeds from a master seed.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
