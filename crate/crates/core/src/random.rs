//! Randomness consumed by the online pipelines.
//!
//! The pipelines only ever need fair coins and uniform draws from `[0, 1)`.
//! Any [`rand::Rng`] is a [`RandomSource`]; [`Scripted`] replays fixed values
//! so that traces can be reproduced by hand.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub trait RandomSource {
    /// Fair coin.
    fn coin(&mut self) -> bool;
    /// Uniform draw from `[0, 1)`.
    fn unit(&mut self) -> f64;
}

impl<R: Rng + ?Sized> RandomSource for R {
    fn coin(&mut self) -> bool {
        self.gen::<bool>()
    }

    fn unit(&mut self) -> f64 {
        self.gen::<f64>()
    }
}

/// The generator used for every seeded run.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Replays pre-recorded coins and uniform draws in order.
///
/// Panics when a pipeline asks for more values than were scripted.
#[derive(Clone, Debug, Default)]
pub struct Scripted {
    coins: VecDeque<bool>,
    units: VecDeque<f64>,
}

impl Scripted {
    pub fn new(coins: impl IntoIterator<Item = bool>, units: impl IntoIterator<Item = f64>) -> Self {
        Scripted {
            coins: coins.into_iter().collect(),
            units: units.into_iter().collect(),
        }
    }

    pub fn remaining(&self) -> (usize, usize) {
        (self.coins.len(), self.units.len())
    }
}

impl RandomSource for Scripted {
    fn coin(&mut self) -> bool {
        self.coins.pop_front().expect("scripted coins exhausted")
    }

    fn unit(&mut self) -> f64 {
        self.units.pop_front().expect("scripted uniform draws exhausted")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_reproducible() {
        let mut a = seeded(42);
        let mut b = seeded(42);
        for _ in 0..32 {
            assert_eq!(a.coin(), b.coin());
            assert_eq!(a.unit().to_bits(), b.unit().to_bits());
        }
    }

    #[test]
    fn scripted_replays_in_order() {
        let mut s = Scripted::new([true, false], [0.25]);
        assert!(s.coin());
        assert_eq!(s.unit(), 0.25);
        assert!(!s.coin());
        assert_eq!(s.remaining(), (0, 0));
    }

    #[test]
    #[should_panic(expected = "exhausted")]
    fn scripted_panics_when_empty() {
        Scripted::default().coin();
    }
}
