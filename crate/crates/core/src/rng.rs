//! Counter-addressed Gaussian pairs.
//!
//! Each draw index owns a fixed block of four 32-bit words of a ChaCha8
//! keystream selected by `(seed, stream)`, so the pair at index `k` is a pure
//! function of `(seed, stream, k)` and can be generated from any position
//! without replaying earlier draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_PAIR: u128 = 4;

#[derive(Debug, Clone)]
pub struct NormalStream {
    inner: ChaCha8Rng,
}

impl NormalStream {
    /// Stream positioned so the next pair is the one at `index`.
    pub fn at(seed: u64, stream: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        inner.set_word_pos(WORDS_PER_PAIR * index as u128);
        Self { inner }
    }

    /// Stream keyed by `(seed, domain)` instead of `seed`, for draws that must
    /// not coincide with the plain `(seed, stream)` family.
    pub fn derived(seed: u64, domain: u64, stream: u64) -> Self {
        Self::at(splitmix64(seed ^ splitmix64(domain)), stream, 0)
    }

    /// Two independent standard normals (Box-Muller).
    #[inline]
    pub fn next_pair(&mut self) -> (f64, f64) {
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
