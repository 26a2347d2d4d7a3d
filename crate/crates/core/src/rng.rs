//! Keyed random streams.
//!
//! Each stream is a ChaCha8 generator whose key is built from the master
//! seed and a retry ordinal, and whose 64-bit stream id is the record (or
//! pixel) index. Streams for different indices never overlap, so work can be
//! fanned out to any number of workers and the result depends only on the
//! seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone)]
pub struct RandomStream {
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64, retry: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&retry.to_le_bytes());
        key[16..24].copy_from_slice(b"pxmap-rs");
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(index);
        RandomStream { inner }
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `[lo, hi]`.
    #[inline]
    pub fn int_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        self.inner.random_range(lo..=hi)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Gaussian draw. A zero `std` returns `mean` without consuming entropy.
    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        if std == 0.0 {
            return mean;
        }
        Normal::new(mean, std)
            .expect("standard deviation must be finite")
            .sample(&mut self.inner)
    }
}
