//! Deterministic random-number plumbing.
//!
//! Every stochastic experiment takes a 64-bit seed. `SeededRng` wraps a
//! ChaCha8 stream cipher; `substream(i)` selects one of 2^64 independent
//! streams from the same seed, which is how Monte-Carlo trials stay
//! reproducible regardless of how they are scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `i` of the same seed.
    pub fn substream(&self, i: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(i);
        SeededRng { seed: self.seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.gen_range(lo..hi)
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        if std_dev == 0.0 {
            return mean;
        }
        Normal::new(mean, std_dev).expect("valid std dev").sample(&mut self.inner)
    }

    pub fn gen_u64(&mut self) -> u64 {
        self.inner.gen()
    }
}
