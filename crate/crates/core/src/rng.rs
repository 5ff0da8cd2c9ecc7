//! Seeded random streams.
//!
//! Every random quantity is drawn from ChaCha20 (`rand_chacha` 0.9), a
//! counter-based generator. A single 64-bit seed is expanded into a 256-bit
//! key by `SeedableRng::seed_from_u64`; independent draws for the same seed use
//! distinct ChaCha stream ids (see [`Stream`]), so the measurement matrix,
//! the support pattern and the amplitudes never share keystream.
//!
//! Per-trial seeds are derived from a base seed and an index path with
//! [`derive_seed`] (a SplitMix64 fold), which keeps trials independent of the
//! order in which they are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier recorded in manifests so results can be tied to the generator.
pub const GENERATOR: &str = "chacha20/rand_chacha-0.9;splitmix64-derive";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Matrix = 0,
    Support = 1,
    Amplitude = 2,
    /// Free for callers (tests, examples) that need extra draws.
    Aux = 3,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and an index path.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}
