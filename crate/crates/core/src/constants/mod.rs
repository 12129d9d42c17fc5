//! Ratio functionals for the martingale inequalities, the explicit Hilbert
//! witnesses, adversarial search and growth-law fits.
//!
//! Every number produced here is a lower bound on a best constant: the
//! ratio of an explicit input, which is stored with the estimate and can be
//! replayed.

mod growth;
mod kinds;
mod ratio;
mod search;
mod witness;

pub use growth::{growth_fit, FitModel, GrowthFit};
pub use kinds::{EstimateKind, InequalityKind};
pub use ratio::{column_matrix, hardy_upper, outer, ratio, RatioInput, SequenceInput};
pub use search::{adversarial_search, adversarial_search_seeded};
pub use witness::{hilbert_input, hilbert_witness};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, Exponent};
use crate::triproj::triangular_ratio;

/// The input that attains an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "snake_case")]
pub enum Witness {
    /// A matrix `x` for `||T x||_p / ||x||_p`.
    Matrix(ComplexMatrix),
    Ratio(RatioInput),
}

/// A certified lower bound on a best constant at size `n` and exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: EstimateKind,
    pub n: usize,
    pub p: Exponent,
    pub lower_bound: f64,
    pub witness: Witness,
    pub iterations: usize,
    pub seed: u64,
    /// `false` when an iterative search stopped on its iteration budget.
    pub converged: bool,
    /// Relative improvement of the best run over its final stretch; zero for
    /// closed-form witnesses.
    pub rel_gap: f64,
}

impl ConstantEstimate {
    /// Re-evaluates the stored witness with the exact norm code.
    pub fn replay(&self) -> Result<f64> {
        match (&self.kind, &self.witness) {
            (EstimateKind::Triproj, Witness::Matrix(x)) => triangular_ratio(x, self.p),
            (EstimateKind::Inequality(k), Witness::Ratio(input)) => ratio(*k, input, self.p),
            _ => Err(Error::input(format!(
                "witness form does not match {}",
                self.kind
            ))),
        }
    }

    /// Relative discrepancy between the stored bound and its replay.
    pub fn replay_error(&self) -> Result<f64> {
        let v = self.replay()?;
        Ok((v - self.lower_bound).abs() / self.lower_bound.abs().max(f64::MIN_POSITIVE))
    }
}
