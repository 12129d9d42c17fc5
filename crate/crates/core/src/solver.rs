//! Options, status flags and seeding shared by the iterative solvers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::matcore::ComplexMatrix;

/// Knobs for every iterative routine (Hardy solvers, norm-ratio ascent,
/// adversarial search). Plain numeric fields so they can come from config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative objective change under which a run counts as converged.
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 400,
            tolerance: 1e-9,
            restarts: 8,
            seed: 0x5eed,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }
}

/// Convergence report attached to solver output. Non-convergence is a flag,
/// never an error: the best iterate found is still a valid bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStatus {
    pub converged: bool,
    pub iterations: usize,
    /// Relative objective change over the final stretch of the best run.
    pub rel_change: f64,
}

impl SolverStatus {
    pub(crate) fn merge(self, other: SolverStatus) -> SolverStatus {
        SolverStatus {
            converged: self.converged && other.converged,
            iterations: self.iterations + other.iterations,
            rel_change: self.rel_change.max(other.rel_change),
        }
    }
}

/// SplitMix64 finaliser; derives independent child seeds from `(seed, index)`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian entry, `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `g* g` for a Gaussian `g`; a generic positive semidefinite sample.
pub fn gaussian_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    g.adjoint().matmul(&g)
}
