//! Seeded randomness with a fixed draw contract: member indices come from one
//! ChaCha stream via inverse-CDF on the weights, Bernoulli coins from a
//! second stream via one uniform each. Keeping the streams apart means the
//! index sequence of a coin-flipping method matches the index sequence of a
//! coin-free method under the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INDEX_STREAM: u64 = 0;
const COIN_STREAM: u64 = 1;

#[derive(Debug, Clone)]
pub struct SamplerRng {
    index: ChaCha8Rng,
    coin: ChaCha8Rng,
}

impl SamplerRng {
    pub fn new(seed: u64) -> Self {
        let mut index = ChaCha8Rng::seed_from_u64(seed);
        index.set_stream(INDEX_STREAM);
        let mut coin = ChaCha8Rng::seed_from_u64(seed);
        coin.set_stream(COIN_STREAM);
        Self { index, coin }
    }

    /// Generator for trial `t` of a multi-trial run with the given base seed.
    pub fn for_trial(base_seed: u64, trial: u64) -> Self {
        Self::new(base_seed.wrapping_add(trial))
    }

    /// Samples a member index by inverse CDF: one uniform draw, walked
    /// through the cumulative weights.
    pub fn draw_index(&mut self, weights: &[f64]) -> usize {
        let u: f64 = self.index.random();
        let mut cum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            cum += w;
            if u < cum {
                return i;
            }
        }
        weights.len() - 1
    }

    /// One uniform draw compared against `p`.
    pub fn draw_coin(&mut self, p: f64) -> bool {
        self.coin.random::<f64>() < p
    }
}
