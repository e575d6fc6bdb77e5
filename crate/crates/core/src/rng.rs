//! Counter-based Gaussian streams.
//!
//! Every draw is addressed by `(seed, trial, mode)`: the seed picks the
//! ChaCha8 key, the trial picks the stream and the mode picks the block
//! position. Any trial, or any single mode of it, can therefore be
//! regenerated in isolation and in any order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 32-bit words reserved per mode: two uniforms of 64 bits each.
const WORDS_PER_MODE: u128 = 4;

#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self { rng }
    }

    /// The pair of independent standard real Gaussians attached to `mode`.
    pub fn pair(&mut self, mode: u64) -> (f64, f64) {
        self.rng.set_word_pos(mode as u128 * WORDS_PER_MODE);
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        // Box–Muller; u1 ∈ (0, 1] keeps the logarithm finite.
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Standard complex Gaussian `(g₁ + i g₂)/√2` attached to `mode`.
    pub fn complex(&mut self, mode: u64) -> num_complex::Complex64 {
        let (a, b) = self.pair(mode);
        num_complex::Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }
}
