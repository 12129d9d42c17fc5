//! Dense matrix laboratory for non-commutative martingale inequalities.
//!
//! Everything lives on the canonical filtration of `n x n` complex matrices:
//! corner compressions `E_k(a) = e_k a e_k`, their faithful augmented
//! variants, martingale increments built from a terminal matrix, Schatten
//! norms of square functions, and the triangular projection.
//!
//! The crate is organised bottom-up:
//!
//! - [`matcore`]: the complex matrix type, SVD/eigen kernels, Schatten and
//!   weak-L1 norms, square-function norms.
//! - [`filtration`]: conditional expectations, increments, sign transforms.
//! - [`hardy`]: Hardy-space norms (exact for `p >= 2`, certified upper bounds
//!   by convex optimisation for `p < 2`), the conditioned bracket and the
//!   maximal norm of positive sequences.
//! - [`triproj`]: triangular truncation, the Hilbert matrix, hook splitting
//!   and lower bounds on `t_{p,n}`.
//! - [`constants`]: ratio functionals for every inequality, explicit Hilbert
//!   witnesses, adversarial search and growth-law fits.
//!
//! Data-parallel loops go through [`par`]; with the `parallel` feature off
//! they run sequentially and produce identical numbers.

pub mod constants;
pub mod error;
pub mod filtration;
pub mod hardy;
pub mod matcore;
pub mod par;
pub mod solver;
pub mod triproj;

pub use error::{Error, Result};
pub use matcore::{c64, ComplexMatrix, Exponent, Side, SingularSpectrum};
