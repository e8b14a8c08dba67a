//! Deterministic fixtures shared by the benchmarks.

use ncmax_core::random::{gaussian_operator, random_mixed_positive_sequence, random_positive_sequence, rng_from_seed};
use ncmax_core::{GridFunction, OperatorSequence};

/// Positive sequence of `n` Gram matrices of size `d`.
pub fn sequence(seed: u64, d: usize, n: usize) -> OperatorSequence {
    random_positive_sequence(seed, d, n, 1.0 / d as f64)
}

/// Rank-deficient, badly scaled positive sequence.
pub fn mixed_sequence(seed: u64, d: usize, n: usize) -> OperatorSequence {
    random_mixed_positive_sequence(&mut rng_from_seed(seed), d, n)
}

/// Gaussian grid function with `size` points.
pub fn grid(seed: u64, d: usize, size: usize) -> GridFunction {
    let mut rng = rng_from_seed(seed);
    GridFunction::new((0..size).map(|_| gaussian_operator(&mut rng, d)).collect()).expect("non-empty grid")
}
