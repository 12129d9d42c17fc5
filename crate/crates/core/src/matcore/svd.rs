//! One-sided (Hestenes) Jacobi SVD with singular vectors.
//!
//! Columns are orthogonalised pairwise in a fixed cyclic order until every
//! pair satisfies `|a_i* a_j| <= JACOBI_TOL * |a_i| |a_j|`. Deterministic and
//! accurate to high relative precision; cost is `O(n^3)` per sweep, so it is
//! reserved for the small matrices the optimisers work with.

use super::matrix::{c64, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Off-diagonal tolerance for a converged pair.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `a = u diag(s) v*` with `s` descending.
///
/// For an `m x n` input, `s` has `min(m, n)` entries, `u` is `m x min(m,n)`
/// and `v` is `n x min(m,n)`. Columns of `u` paired with zero singular values
/// are left zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
    pub sweeps: usize,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.as_slice()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::input("non-finite entry"));
    }
    if a.rows() >= a.cols() {
        Ok(svd_tall(a))
    } else {
        let t = svd_tall(&a.adjoint());
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
            sweeps: t.sweeps,
        })
    }
}

fn dot_conj(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Rotates columns `(i, j)` of `cols` and `vcols` so that they become
/// orthogonal. Returns `false` when the pair was already converged.
fn rotate_pair(cols: &mut [Vec<c64>], vcols: &mut [Vec<c64>], i: usize, j: usize) -> bool {
    let alpha = norm2(&cols[i]);
    let beta = norm2(&cols[j]);
    if alpha == 0.0 || beta == 0.0 {
        return false;
    }
    let gamma = dot_conj(&cols[i], &cols[j]);
    let g = gamma.norm();
    if g <= JACOBI_TOL * (alpha * beta).sqrt() {
        return false;
    }
    // Rotate the phase out of column j first so the pair is real.
    let phase = (gamma / g).conj();
    cols[j].iter_mut().for_each(|z| *z *= phase);
    vcols[j].iter_mut().for_each(|z| *z *= phase);

    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    let (lo, hi) = cols.split_at_mut(j);
    for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = xi * c - yj * s;
        *y = xi * s + yj * c;
    }
    let (lo, hi) = vcols.split_at_mut(j);
    for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = xi * c - yj * s;
        *y = xi * s + yj * c;
    }
    true
}

fn svd_tall(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<c64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<c64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = c64::new(1.0, 0.0);
            e
        })
        .collect();

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                rotated |= rotate_pair(&mut cols, &mut vcols, i, j);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = cols.iter().map(|c| norm2(c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sv = sigma[src];
        s.push(sv);
        if sv > 0.0 {
            for i in 0..m {
                u[(i, dst)] = cols[src][i] / sv;
            }
        }
        for i in 0..n {
            v[(i, dst)] = vcols[src][i];
        }
    }
    Svd { u, s, v, sweeps }
}

impl Svd {
    /// `u diag(f(s)) v*`.
    pub fn recombine<F: Fn(usize, f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let (m, r) = self.u.shape();
        let n = self.v.rows();
        let weights: Vec<f64> = self.s.iter().enumerate().map(|(k, &s)| f(k, s)).collect();
        ComplexMatrix::from_fn(m, n, |i, j| {
            (0..r)
                .filter(|&k| weights[k] != 0.0)
                .map(|k| self.u[(i, k)] * self.v[(j, k)].conj() * weights[k])
                .sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(m, n, |i, j| {
            let t = (i * 7 + j * 3) as f64;
            c64::new((t * 0.37).sin(), (t * 0.61).cos() - 0.2)
        })
    }

    #[test]
    fn reconstructs_tall_and_wide() {
        for (m, n) in [(5, 5), (6, 3), (3, 6), (1, 4)] {
            let a = sample(m, n);
            let d = svd(&a).unwrap();
            let back = d.recombine(|_, s| s);
            assert!(back.max_abs_diff(&a) < 1e-12, "{m}x{n}");
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn right_vectors_are_unitary() {
        let d = svd(&sample(6, 6)).unwrap();
        let vv = &d.v.adjoint() * &d.v;
        assert!(vv.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
    }
}
