//! Cyclic Jacobi eigensolver for Hermitian matrices.

use super::matrix::{c64, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues ascending, with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Diagonalises the Hermitian part of `a`. Input that is not Hermitian to
/// within `1e-8` relative is rejected.
pub fn eigh(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.require_square("eigh")?;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    if !a.is_hermitian(1e-8 * scale) {
        return Err(Error::input("eigh needs a Hermitian matrix"));
    }
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let frob = m.frobenius_norm();
    let target = 1e-15 * frob;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 || g <= 1e-300 {
                    continue;
                }
                // Phase step: D* m D with D_qq = conj(apq)/|apq| makes m_pq real.
                let ph = (apq / g).conj();
                for r in 0..n {
                    m[(r, q)] *= ph;
                }
                for r in 0..n {
                    m[(q, r)] *= ph.conj();
                }
                for r in 0..n {
                    v[(r, q)] *= ph;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (x, y) = (m[(r, p)], m[(r, q)]);
                    m[(r, p)] = x * c - y * s;
                    m[(r, q)] = x * s + y * c;
                }
                for r in 0..n {
                    let (x, y) = (m[(p, r)], m[(q, r)]);
                    m[(p, r)] = x * c - y * s;
                    m[(q, r)] = x * s + y * c;
                }
                for r in 0..n {
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = x * c - y * s;
                    v[(r, q)] = x * s + y * c;
                }
                m[(p, q)] = c64::new(0.0, 0.0);
                m[(q, p)] = c64::new(0.0, 0.0);
                m[(p, p)] = c64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = c64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| raw[x].total_cmp(&raw[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

impl HermitianEigen {
    /// `W diag(f(lambda)) W*`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let n = self.values.len();
        let w: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            if w[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w[k];
                for j in i..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        for i in 0..n {
            out[(i, i)] = c64::new(out[(i, i)].re, 0.0);
            for j in i + 1..n {
                out[(j, i)] = out[(i, j)].conj();
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Eigenvector for the largest eigenvalue.
    pub fn top_vector(&self) -> Vec<c64> {
        self.vectors.column(self.values.len() - 1)
    }
}
