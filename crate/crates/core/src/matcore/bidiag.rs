//! Singular values without vectors: Householder bidiagonalisation followed
//! by Sturm-count bisection on the Golub-Kahan tridiagonal.
//!
//! This is the `O(n^3)` route used for large matrices and for every plain
//! norm evaluation. [`super::svd`] is the independent Jacobi route.

use super::scalar::Scalar;
use crate::par::{map_indices, Execution};

/// Row-major `m x n` work array with `m >= n`.
struct Work<S> {
    m: usize,
    n: usize,
    a: Vec<S>,
}

/// Reduces `a` to upper bidiagonal form and returns the moduli of the
/// diagonal and superdiagonal. Those moduli have the same singular values as
/// `a` (the phases are absorbed by diagonal unitaries).
fn bidiagonalize<S: Scalar>(mut w: Work<S>) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (w.m, w.n);
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![S::ZERO; m];
    let mut acc = vec![S::ZERO; n];

    for k in 0..n {
        // Left reflector zeroing A[k+1.., k].
        let len = m - k;
        let mut norm2 = 0.0;
        for i in 0..len {
            v[i] = w.a[(k + i) * n + k];
            norm2 += v[i].abs2();
        }
        let norm = norm2.sqrt();
        if norm > 0.0 {
            let alpha = -v[0].phase().scale(norm);
            v[0] -= alpha;
            let vnorm2: f64 = v[..len].iter().map(|z| z.abs2()).sum();
            if vnorm2 > 0.0 {
                let beta = 2.0 / vnorm2;
                let cols = n - k - 1;
                if cols > 0 {
                    // acc_j = sum_i conj(v_i) A[k+i, k+1+j]
                    let acc = &mut acc[..cols];
                    acc.iter_mut().for_each(|x| *x = S::ZERO);
                    for i in 0..len {
                        let vi = v[i].conj();
                        if vi == S::ZERO {
                            continue;
                        }
                        let row = &w.a[(k + i) * n + k + 1..(k + i + 1) * n];
                        for (a, r) in acc.iter_mut().zip(row) {
                            *a += vi * *r;
                        }
                    }
                    for i in 0..len {
                        let f = v[i].scale(beta);
                        if f == S::ZERO {
                            continue;
                        }
                        let row = &mut w.a[(k + i) * n + k + 1..(k + i + 1) * n];
                        for (r, a) in row.iter_mut().zip(acc.iter()) {
                            *r -= f * *a;
                        }
                    }
                }
            }
            diag[k] = alpha.abs();
        }

        if k + 1 >= n {
            break;
        }
        // Right reflector zeroing A[k, k+2..]. Built from the conjugated row
        // so that A <- A (I - beta u u*) maps row k onto its first entry.
        let len = n - k - 1;
        let mut norm2 = 0.0;
        for j in 0..len {
            v[j] = w.a[k * n + k + 1 + j].conj();
            norm2 += v[j].abs2();
        }
        let norm = norm2.sqrt();
        if norm > 0.0 {
            let alpha = -v[0].phase().scale(norm);
            v[0] -= alpha;
            let vnorm2: f64 = v[..len].iter().map(|z| z.abs2()).sum();
            if vnorm2 > 0.0 {
                let beta = 2.0 / vnorm2;
                let u = &v[..len];
                for i in k..m {
                    let row = &mut w.a[i * n + k + 1..(i + 1) * n];
                    let mut s = S::ZERO;
                    for (r, uj) in row.iter().zip(u) {
                        s += *r * *uj;
                    }
                    if s == S::ZERO {
                        continue;
                    }
                    let s = s.scale(beta);
                    for (r, uj) in row.iter_mut().zip(u) {
                        *r -= s * uj.conj();
                    }
                }
            }
            sup[k] = alpha.abs();
        }
    }
    (diag, sup)
}

/// Number of eigenvalues of the zero-diagonal symmetric tridiagonal with
/// off-diagonal `off` that are strictly below `x`.
fn sturm_count(off2: &[f64], x: f64, pivmin: f64) -> usize {
    let mut q = -x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    let mut count = usize::from(q < 0.0);
    for &b2 in off2 {
        q = -x - b2 / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        count += usize::from(q < 0.0);
    }
    count
}

/// Singular values of the real bidiagonal `(diag, sup)`, descending.
/// `count` limits the computation to the largest `count` values.
pub(crate) fn bidiagonal_singular_values(
    diag: &[f64],
    sup: &[f64],
    count: usize,
    exec: Execution,
) -> Vec<f64> {
    let n = diag.len();
    // Golub-Kahan tridiagonal of size 2n: off-diagonal d0, e0, d1, e1, ...
    let mut off2 = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        off2.push(diag[k] * diag[k]);
        if k < sup.len() {
            off2.push(sup[k] * sup[k]);
        }
    }
    let max_off = off2.iter().copied().fold(0.0, f64::max).sqrt();
    if max_off == 0.0 {
        return vec![0.0; count.min(n)];
    }
    let upper = 2.0 * max_off * (1.0 + 1e-12);
    let pivmin = f64::MIN_POSITIVE * max_off.max(1.0).powi(2);
    let abs_tol = 4.0 * f64::EPSILON * f64::EPSILON * max_off;
    let total = 2 * n;

    map_indices(exec, count.min(n), |j| {
        // j-th largest singular value = eigenvalue with ascending index 2n-1-j.
        let target = total - 1 - j;
        let (mut lo, mut hi) = (0.0f64, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&off2, mid, pivmin) > target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= abs_tol + 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    })
}

fn largest<S: Scalar>(
    rows: usize,
    cols: usize,
    data: Vec<S>,
    count: usize,
    exec: Execution,
) -> Vec<f64> {
    let (diag, sup) = bidiagonalize(Work {
        m: rows,
        n: cols,
        a: data,
    });
    bidiagonal_singular_values(&diag, &sup, count, exec)
}

/// Largest `count` singular values of a row-major `rows x cols` matrix,
/// descending. Transposes wide input so the work array is tall.
pub(crate) fn singular_values_of<S: Scalar>(
    rows: usize,
    cols: usize,
    data: &[S],
    count: usize,
    exec: Execution,
) -> Vec<f64> {
    if rows >= cols {
        largest(rows, cols, data.to_vec(), count, exec)
    } else {
        let mut t = vec![S::ZERO; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = data[i * cols + j].conj();
            }
        }
        largest(cols, rows, t, count, exec)
    }
}
