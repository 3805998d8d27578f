//! Seeded, platform-independent random stream.
//!
//! The generator is xoshiro256++ whose 256-bit state is filled from the 64-bit
//! seed by four successive SplitMix64 outputs:
//!
//! ```text
//! splitmix64: z = (s += 0x9E3779B97F4A7C15);
//!             z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!             z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//!             return z ^ (z >> 31)
//! xoshiro256++: out = rotl(s0 + s3, 23) + s0
//!             t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3;
//!             s2 ^= t; s3 = rotl(s3, 45)
//! ```
//!
//! Derived draws:
//! - `next_f64` = `(next_u64 >> 11) * 2^-53`, in `[0, 1)`.
//! - `normal` is Box-Muller on two uniforms `u1 = 1 - next_f64()` (so `u1 > 0`)
//!   and `u2 = next_f64()`: `r = sqrt(-2 ln u1)`, the pair
//!   `(r cos 2 pi u2, r sin 2 pi u2)` is returned cosine first, the sine value
//!   cached for the following call.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct Prng {
    inner: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        lo + ((self.next_f64() * span) as i64).min(hi - lo)
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}
