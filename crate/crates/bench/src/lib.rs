//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tetraqkd::keygen::{sample_letter_pairs, LetterSequence};
use tetraqkd::NoiseParameter;

pub fn noise(eps: f64) -> NoiseParameter {
    NoiseParameter::new(eps).expect("benchmark noise values lie in [0, 1]")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Alice and Bob letters for `n` transmitted pairs at noise `eps`.
pub fn letter_pairs(eps: f64, n: usize, seed: u64) -> (LetterSequence, LetterSequence) {
    sample_letter_pairs(noise(eps), n, &mut rng(seed)).expect("sampling from a valid table")
}
