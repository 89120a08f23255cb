//! Seedable random source with independent per-process substreams.
//!
//! Every stochastic ingredient of a run (error increments, context weights,
//! channel outcomes, randomized policy coin flips) draws from its own stream
//! keyed by `(seed, Stream)`. Streams never interact, so two policies run on
//! the same seed see bit-identical increment and weight sample paths even
//! when they attempt transmissions at different slots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// The independent substreams of one seeded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Error increments `A_t`.
    Increment,
    /// Context weights.
    Weight,
    /// Channel success draws (consumed only on attempted transmissions).
    Channel,
    /// Policy-internal randomness (randomized baseline).
    Policy,
}

impl Stream {
    fn index(self) -> u64 {
        match self {
            Stream::Increment => 1,
            Stream::Weight => 2,
            Stream::Channel => 3,
            Stream::Policy => 4,
        }
    }
}

/// One deterministic stream of randomness, owned by a single run.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha12Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream.index());
        Self { rng }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Bernoulli draw; exact at `p = 0` and `p = 1`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    /// Zero-mean Gaussian draw with the given standard deviation.
    pub fn gaussian(&mut self, std_dev: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * std_dev
    }
}

/// Derives the sub-seed for point `index` of a multi-point invocation
/// (seed sweeps, per-rho tradeoff points). SplitMix64 finalizer.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
