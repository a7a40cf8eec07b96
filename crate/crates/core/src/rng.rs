//! Counter-based random number generation.
//!
//! Every variate in a simulation is addressed by the tuple
//! `(master seed, replication index, stage, subject index)` and produced by
//! hashing that tuple, so any single response can be regenerated in isolation
//! and the output of a run is independent of scheduling and thread count.
//! The mixer is the splitmix64 finalizer, applied after absorbing each
//! component of the key.
//!
//! Normal variates are produced by inverting the standard normal CDF on a
//! single uniform draw, so the stream position advances by exactly one step
//! per response.

use crate::numeric::special::normal_quantile;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer (Stafford mix 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of a substream key to 64 random-looking bits.
#[inline]
pub fn counter_bits(seed: u64, rep: u64, stage: u32, subject: u64) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    h = mix64(h.wrapping_add(rep.wrapping_mul(GOLDEN)));
    h = mix64(h.wrapping_add((stage as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)));
    mix64(h.wrapping_add(subject.wrapping_mul(0x94d0_49bb_1331_11eb)))
}

/// Uniform draw strictly inside (0, 1) for a substream key.
#[inline]
pub fn uniform(seed: u64, rep: u64, stage: u32, subject: u64) -> f64 {
    bits_to_unit(counter_bits(seed, rep, stage, subject))
}

/// Standard-normal draw for a substream key (inverse-CDF method).
#[inline]
pub fn standard_normal(seed: u64, rep: u64, stage: u32, subject: u64) -> f64 {
    normal_quantile(uniform(seed, rep, stage, subject))
}

#[inline]
fn bits_to_unit(bits: u64) -> f64 {
    // 52 high bits, offset half a step: never exactly 0 or 1, and the
    // half-step stays exactly representable at the top of the range.
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// A small sequential generator for tests and auxiliary draws, built on the
/// same counter hash.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let bits = counter_bits(self.seed, self.counter, u32::MAX, u64::MAX);
        self.counter += 1;
        bits
    }

    pub fn next_uniform(&mut self) -> f64 {
        bits_to_unit(self.next_u64())
    }

    /// Uniform on [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }

    pub fn next_normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * normal_quantile(self.next_uniform())
    }
}
