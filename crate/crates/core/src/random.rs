//! Seeded random instance generators.
//!
//! Every generator takes an explicit `u64` seed and draws from a ChaCha8
//! stream, so instances are reproducible across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::opcore::{CMatrix, GeneralOperator, HermitianOperator, C64};
use crate::vvnorms::OperatorSequence;

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-seed for trial `index` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex Gaussian with `E|z|^2 = 1`.
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_operator(rng: &mut impl Rng, d: usize) -> GeneralOperator {
    GeneralOperator::new(gaussian_matrix(rng, d, d)).expect("square")
}

pub fn gaussian_hermitian(rng: &mut impl Rng, d: usize) -> HermitianOperator {
    HermitianOperator::new(gaussian_matrix(rng, d, d)).expect("square")
}

/// Wishart-type positive matrix `g^* g / d` with `g` of shape `rank x d`.
pub fn wishart(rng: &mut impl Rng, d: usize, rank: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, rank.max(1), d);
    let gram = g.adjoint() * g;
    HermitianOperator::new(gram).expect("square").scale(1.0 / d as f64)
}

/// `N` items `g^* g` with Gaussian `d x d` factors, multiplied by `scale`.
pub fn random_positive_sequence(seed: u64, d: usize, n: usize, scale: f64) -> OperatorSequence {
    let mut rng = rng_from_seed(seed);
    let items = (0..n).map(|_| wishart(&mut rng, d, d).scale(scale)).collect();
    OperatorSequence::positive(items).expect("Gram matrices are positive")
}

/// Positive sequence with random ranks and log-uniform item scales in
/// `[1e-2, 1e2]`; exercises rank-deficient and badly scaled families.
pub fn random_mixed_positive_sequence(rng: &mut impl Rng, d: usize, n: usize) -> OperatorSequence {
    let items = (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=d);
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            wishart(rng, d, rank).scale(scale)
        })
        .collect();
    OperatorSequence::positive(items).expect("Gram matrices are positive")
}

/// Random contraction: a Gaussian matrix divided by its operator norm times
/// a factor uniform in `[0.5, 1]`.
pub fn random_contraction(rng: &mut impl Rng, d: usize) -> GeneralOperator {
    let g = gaussian_operator(rng, d);
    let norm = g.operator_norm().max(f64::MIN_POSITIVE);
    let shrink: f64 = rng.random_range(0.5..=1.0);
    g.scale(shrink / norm)
}

/// Invertible perturbation `I + eps * G`, rescaled to unit determinant modulus
/// so that it does not trivially inflate norms.
pub fn near_identity(rng: &mut impl Rng, d: usize, eps: f64) -> GeneralOperator {
    let g = gaussian_matrix(rng, d, d) * C64::new(eps, 0.0) + CMatrix::identity(d, d);
    let det = g.determinant().norm();
    let s = if det > 1e-12 { det.powf(-1.0 / d as f64) } else { 1.0 };
    GeneralOperator::new(g * C64::new(s, 0.0)).expect("square")
}
