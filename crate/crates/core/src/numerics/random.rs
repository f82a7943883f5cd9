//! Seeded random stream with Gaussian sampling.
//!
//! A `RandomStream` wraps a ChaCha8 generator keyed by a 64-bit seed plus a
//! substream id, so a Monte Carlo harness can hand out independent,
//! individually reproducible streams: run `r` uses seed `base + r`, and
//! within a run the environment draw and each episode variant get their own
//! substream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Deterministic random stream: same (seed, substream) pair, same outputs.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    substream: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_substream(seed, 0)
    }

    pub fn with_substream(seed: u64, substream: u64) -> Self {
        let key = expand_seed(seed, substream);
        Self {
            seed,
            substream,
            rng: ChaCha8Rng::from_seed(key),
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// Fresh stream with the same seed but a different substream id,
    /// independent of this stream's current position.
    pub fn derive(&self, substream: u64) -> RandomStream {
        Self::with_substream(self.seed, substream)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the open interval (0, 1).
    fn next_open_f64(&mut self) -> f64 {
        loop {
            let u = self.next_f64();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard normal draw by the Marsaglia polar method. Pairs are drawn
    /// together; the second value is cached for the next call.
    pub fn next_standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Uniform integer in [0, bound) by rejection, bias-free.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Exponential draw with the given rate, used by test harnesses.
    pub fn next_exponential(&mut self, rate: f64) -> f64 {
        -self.next_open_f64().ln() / rate
    }
}

/// Gaussian draw with the given mean and standard deviation.
///
/// `sd = 0` returns the mean exactly without consuming the stream.
pub fn gaussian_sample(stream: &mut RandomStream, mean: f64, sd: f64) -> Result<f64> {
    if !(sd >= 0.0) {
        return Err(Error::NegativeStandardDeviation { value: sd });
    }
    if sd == 0.0 {
        return Ok(mean);
    }
    Ok(mean + sd * stream.next_standard_normal())
}

/// Expand (seed, substream) into a 32-byte ChaCha key with a SplitMix64
/// chain. Distinct inputs give unrelated keys.
fn expand_seed(seed: u64, substream: u64) -> [u8; 32] {
    let mut state = seed ^ substream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}
