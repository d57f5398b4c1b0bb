//! Seeded randomness with a splittable stream contract.
//!
//! One root seed plus a stream index select an independent ChaCha20 stream;
//! replications of an experiment draw from distinct streams of the same root
//! seed, so they can run in any order (or in parallel) and still reproduce
//! byte-identically.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::float;

/// Root seed + stream index identifying one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(root: u64) -> Self {
        Seed { root, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Seed { stream, ..self }
    }
}

/// Counter-based generator over one stream.
pub struct StreamRng {
    inner: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: Seed) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed.root);
        inner.set_stream(seed.stream);
        StreamRng { inner, spare_normal: None }
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random bits, offset by half an ulp so 0 and 1 are excluded.
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = float::sqrt(-2.0 * float::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(r * libm::sin(theta));
        r * float::cos(theta)
    }

    /// Integer in [0, n).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Rejection-free modulo bias is negligible for the n used here, but
        // widening multiply avoids it outright.
        let x = self.inner.next_u64();
        ((x as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}
