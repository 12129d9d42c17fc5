//! Dense complex-matrix kernel: singular values, modulus, Schatten and
//! weak-L1 norms, square-function norms.

mod bidiag;
mod eigh;
mod exponent;
mod matrix;
mod scalar;
mod svd;

pub use eigh::{eigh, HermitianEigen};
pub use exponent::Exponent;
pub use matrix::{c64, ComplexMatrix};
pub use svd::{svd, Svd, JACOBI_TOL};

pub(crate) use matrix::{add_outer, add_outer_conj_left, ZERO};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Singular values sorted descending, all non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(sum s^p)^(1/p)`, or the largest value for infinity.
    pub fn norm(&self, p: Exponent) -> f64 {
        spectrum_quasi_norm(&self.0, p.as_f64())
    }
}

/// Which square function: `sum x_k* x_k` (column) or `sum x_k x_k*` (row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Column,
    Row,
}

fn check_finite(a: &ComplexMatrix) -> Result<()> {
    if a.as_slice()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::input("non-finite entry"));
    }
    Ok(())
}

/// All singular values of `a`, descending, through Householder
/// bidiagonalisation and bisection.
pub fn singular_values(a: &ComplexMatrix) -> Result<SingularSpectrum> {
    singular_values_with(a, Execution::default())
}

pub fn singular_values_with(a: &ComplexMatrix, exec: Execution) -> Result<SingularSpectrum> {
    check_finite(a)?;
    let count = a.rows().min(a.cols());
    Ok(SingularSpectrum(top_singular_values(a, count, exec)))
}

fn top_singular_values(a: &ComplexMatrix, count: usize, exec: Execution) -> Vec<f64> {
    let (m, n) = a.shape();
    if a.is_real() {
        let re: Vec<f64> = a.as_slice().iter().map(|z| z.re).collect();
        bidiag::singular_values_of(m, n, &re, count, exec)
    } else {
        bidiag::singular_values_of(m, n, a.as_slice(), count, exec)
    }
}

/// Largest singular value only.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    check_finite(a)?;
    Ok(top_singular_values(a, 1, Execution::Sequential)[0])
}

/// `|a| = (a* a)^(1/2)`, assembled as `v diag(s) v*` from the Jacobi SVD.
pub fn modulus(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square("modulus")?;
    let d = svd(a)?;
    let m = d.v.rows();
    let mut out = ComplexMatrix::zeros(m, m);
    for (k, &s) in d.s.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let col = d.v.column(k);
        let scaled: Vec<c64> = col.iter().map(|z| z * s.sqrt()).collect();
        add_outer(&mut out, &scaled);
    }
    Ok(out.hermitian_part())
}

/// `(sum s^q)^(1/q)` for any `q > 0` (a quasi-norm below one), or the
/// maximum for `q = inf`.
pub fn spectrum_quasi_norm(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    // Scale out the maximum to keep large exponents finite.
    let sum: f64 = values.iter().map(|&s| (s.max(0.0) / max).powf(q)).sum();
    max * sum.powf(1.0 / q)
}

pub fn schatten_norm(a: &ComplexMatrix, p: Exponent) -> Result<f64> {
    if p.is_infinite() {
        return operator_norm(a);
    }
    if p == Exponent::TWO {
        check_finite(a)?;
        return Ok(a.frobenius_norm());
    }
    Ok(singular_values(a)?.norm(p))
}

/// `max_k k * s_k` over descending singular values: the weak-L1 quasi-norm
/// under the non-normalised trace.
pub fn weak_l1_norm(a: &ComplexMatrix) -> Result<f64> {
    let s = singular_values(a)?;
    Ok(weak_l1_of_spectrum(s.values()))
}

pub fn weak_l1_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(k, &s)| (k + 1) as f64 * s)
        .fold(0.0, f64::max)
}

/// Schatten `q` quasi-norm of a positive semidefinite matrix, `q >= 1/2`.
/// Eigenvalues are taken as singular values, so rounding noise never turns
/// negative.
pub fn psd_quasi_norm(s: &ComplexMatrix, q: f64) -> Result<f64> {
    if q.is_infinite() {
        return operator_norm(s);
    }
    if q == 1.0 {
        return Ok(s.trace().re.max(0.0));
    }
    let spec = singular_values(s)?;
    Ok(spectrum_quasi_norm(spec.values(), q))
}

/// Running sum of `x* x` (column) or `x x*` (row) terms.
///
/// Sparse-aware: a term with few nonzero rows (columns) costs only the
/// square of its row (column) support, so hook-shaped increments of an
/// `n x n` matrix accumulate in `O(n^2)` each.
#[derive(Debug, Clone)]
pub struct SquareFunction {
    side: Side,
    acc: ComplexMatrix,
}

impl SquareFunction {
    pub fn new(n: usize, side: Side) -> Self {
        SquareFunction {
            side,
            acc: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn add(&mut self, x: &ComplexMatrix) -> Result<()> {
        let n = self.acc.rows();
        if x.shape() != (n, n) {
            return Err(Error::shape(format!(
                "square-function term is {}x{}, expected {n}x{n}",
                x.rows(),
                x.cols()
            )));
        }
        match self.side {
            Side::Column => {
                for i in 0..n {
                    add_outer_conj_left(&mut self.acc, x.row(i));
                }
            }
            Side::Row => {
                for j in 0..n {
                    add_outer(&mut self.acc, &x.column(j));
                }
            }
        }
        Ok(())
    }

    /// The accumulated positive matrix `S`.
    pub fn gram(&self) -> &ComplexMatrix {
        &self.acc
    }

    pub fn into_gram(self) -> ComplexMatrix {
        self.acc
    }

    /// `|| S^(1/2) ||_p = || S ||_{p/2}^(1/2)`.
    pub fn norm(&self, p: Exponent) -> Result<f64> {
        Ok(psd_quasi_norm(&self.acc, p.half())?.sqrt())
    }
}

/// `|| (sum x_k* x_k)^(1/2) ||_p` (column) or the row variant with
/// `x_k x_k*`, evaluated as `|| sum ... ||_{p/2}^(1/2)`.
pub fn sq_fn_norm(xs: &[ComplexMatrix], p: Exponent, side: Side) -> Result<f64> {
    let first = xs
        .first()
        .ok_or_else(|| Error::input("square function of an empty list"))?;
    let n = first.require_square("sq_fn_norm")?;
    let mut acc = SquareFunction::new(n, side);
    for x in xs {
        acc.add(x)?;
    }
    acc.norm(p)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(a)?.min())
}

pub fn max_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(a)?.max())
}

/// Smoothed Schatten norm and its gradient (w.r.t. the real inner product
/// `Re Tr(x* y)`), used by the ascent and descent solvers.
///
/// Finite `p` replaces `s` by `sqrt(s^2 + eps^2)`; infinity uses a soft
/// maximum with temperature `eps`. With `eps = 0` the value is exact and the
/// gradient is a subgradient.
pub fn smoothed_norm_grad(
    a: &ComplexMatrix,
    p: Exponent,
    eps: f64,
) -> Result<(f64, ComplexMatrix)> {
    let d = svd(a)?;
    Ok(smoothed_from_svd(&d, p, eps))
}

pub(crate) fn smoothed_from_svd(d: &Svd, p: Exponent, eps: f64) -> (f64, ComplexMatrix) {
    let s = &d.s;
    match p.finite() {
        Some(p) => {
            let e2 = eps * eps;
            let smooth: Vec<f64> = s.iter().map(|&x| (x * x + e2).sqrt()).collect();
            let value = spectrum_quasi_norm(&smooth, p);
            if value == 0.0 {
                return (0.0, d.recombine(|_, _| 0.0));
            }
            let grad = d.recombine(|k, x| {
                // d/ds of (sum (s^2+e^2)^{p/2})^{1/p} = F^{1-p} s (s^2+e^2)^{(p-2)/2}
                let sm = smooth[k];
                if sm == 0.0 {
                    0.0
                } else {
                    x * (sm / value).powf(p - 2.0) / value
                }
            });
            (value, grad)
        }
        None => {
            let top = s.first().copied().unwrap_or(0.0);
            if eps == 0.0 || s.len() == 1 {
                return (top, d.recombine(|k, _| if k == 0 { 1.0 } else { 0.0 }));
            }
            let w: Vec<f64> = s.iter().map(|&x| ((x - top) / eps).exp()).collect();
            let z: f64 = w.iter().sum();
            let value = top + eps * z.ln();
            (value, d.recombine(|k, _| w[k] / z))
        }
    }
}

#[cfg(test)]
mod tests;
