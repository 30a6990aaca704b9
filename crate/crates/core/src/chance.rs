//! Sources of chance outcomes.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Picks an index into a probability distribution.
pub trait ChanceSource: Send {
    fn sample(&mut self, distribution: &[f64]) -> usize;
}

/// Inverse-CDF sampling over a seeded ChaCha stream. Stream 0 is reserved
/// for chance nodes; policies use their own streams.
#[derive(Debug, Clone)]
pub struct SeededChance {
    rng: ChaCha8Rng,
}

impl SeededChance {
    pub fn new(seed: u64) -> SeededChance {
        SeededChance { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

pub(crate) fn pick(distribution: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, p) in distribution.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    distribution.len().saturating_sub(1)
}

impl ChanceSource for SeededChance {
    fn sample(&mut self, distribution: &[f64]) -> usize {
        let u: f64 = self.rng.gen();
        pick(distribution, u)
    }
}

/// Replays a fixed list of indices, then repeats the last one.
#[derive(Debug, Clone, Default)]
pub struct ScriptedChance {
    picks: VecDeque<usize>,
    last: usize,
}

impl ScriptedChance {
    pub fn new(picks: impl IntoIterator<Item = usize>) -> ScriptedChance {
        ScriptedChance { picks: picks.into_iter().collect(), last: 0 }
    }
}

impl ChanceSource for ScriptedChance {
    fn sample(&mut self, distribution: &[f64]) -> usize {
        if let Some(p) = self.picks.pop_front() {
            self.last = p;
        }
        self.last.min(distribution.len().saturating_sub(1))
    }
}
