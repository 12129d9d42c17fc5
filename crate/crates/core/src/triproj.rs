//! Triangular truncation, the Hilbert matrix and lower bounds on
//! `t_{p,n} = ||T : S_p^n -> S_p^n||`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constants::{ConstantEstimate, EstimateKind, Witness};
use crate::error::{Error, Result};
use crate::matcore::{
    add_outer, add_outer_conj_left, c64, schatten_norm, smoothed_norm_grad, ComplexMatrix,
    Exponent, Side, ZERO,
};
use crate::par::{map_indices, Execution};
use crate::solver::{gaussian_matrix, split_seed, SolverOptions};

/// `T(a)`: keeps `a_ij` for `i <= j`, zeroes the strictly lower part.
pub fn triangular(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square("triangular projection")?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if i <= j {
            a[(i, j)]
        } else {
            ZERO
        }
    }))
}

/// `h_ij = 1/(j - i)` off the diagonal, zero on it.
pub fn hilbert_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::input("Hilbert matrix needs n >= 1"));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ZERO
        } else {
            c64::new(1.0 / (j as f64 - i as f64), 0.0)
        }
    }))
}

/// Column and row halves of the corner increments `d_k x`.
///
/// `a_k` is column `k` of the hook (rows `1..=k`, diagonal included) and
/// `b_k` is row `k` strictly left of the diagonal, so `a_k + b_k = d_k x`
/// and `a_k = d_k(T x)`. Only the vectors are stored; the matrices are
/// materialised on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct HookParts {
    n: usize,
    columns: Vec<Vec<c64>>,
    rows: Vec<Vec<c64>>,
}

/// Splits every corner increment of `x` into its column and row part.
pub fn column_parts(x: &ComplexMatrix) -> Result<HookParts> {
    let n = x.require_square("column_parts")?;
    let columns = (0..n)
        .map(|k| (0..=k).map(|i| x[(i, k)]).collect())
        .collect();
    let rows = (0..n).map(|k| x.row(k)[..k].to_vec()).collect();
    Ok(HookParts { n, columns, rows })
}

impl HookParts {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entries `1..=k` of column `k` (0-based `k`).
    pub fn column(&self, k: usize) -> &[c64] {
        &self.columns[k]
    }

    /// Entries `1..k` of row `k` (0-based `k`).
    pub fn row(&self, k: usize) -> &[c64] {
        &self.rows[k]
    }

    pub fn a_part(&self, k: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for (i, &z) in self.columns[k].iter().enumerate() {
            m[(i, k)] = z;
        }
        m
    }

    pub fn b_part(&self, k: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for (j, &z) in self.rows[k].iter().enumerate() {
            m[(k, j)] = z;
        }
        m
    }

    pub fn a_parts(&self) -> Vec<ComplexMatrix> {
        (0..self.n).map(|k| self.a_part(k)).collect()
    }

    pub fn b_parts(&self) -> Vec<ComplexMatrix> {
        (0..self.n).map(|k| self.b_part(k)).collect()
    }

    /// `sum a_k* a_k` (column) or `sum a_k a_k*` (row), accumulated from the
    /// stored vectors in `O(n^3)` total.
    pub fn a_gram(&self, side: Side) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for (k, v) in self.columns.iter().enumerate() {
            match side {
                Side::Column => acc[(k, k)] += v.iter().map(|z| z.norm_sqr()).sum::<f64>(),
                Side::Row => add_outer(&mut acc, v),
            }
        }
        acc
    }

    /// `sum b_k* b_k` (column) or `sum b_k b_k*` (row).
    pub fn b_gram(&self, side: Side) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for (k, v) in self.rows.iter().enumerate() {
            match side {
                Side::Column => add_outer_conj_left(&mut acc, v),
                Side::Row => acc[(k, k)] += v.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            }
        }
        acc
    }
}

/// `||T x||_p / ||x||_p`.
pub fn triangular_ratio(x: &ComplexMatrix, p: Exponent) -> Result<f64> {
    let den = schatten_norm(x, p)?;
    if den == 0.0 {
        return Err(Error::UndefinedRatio("zero matrix".into()));
    }
    Ok(schatten_norm(&triangular(x)?, p)? / den)
}

/// Norm-attaining dual element: `<J(a), a> = ||a||_p`, `||J(a)||_{p'} = 1`.
fn dual_element(a: &ComplexMatrix, p: Exponent) -> Result<ComplexMatrix> {
    Ok(smoothed_norm_grad(a, p, 0.0)?.1)
}

struct Ascent {
    x: ComplexMatrix,
    ratio: f64,
    iterations: usize,
    rel_change: f64,
    converged: bool,
}

/// Dual power iteration for `||T||_{p -> p}`:
/// `w = J_p(T x)`, `x <- J_{p'}(T w)`. Each step does not decrease the
/// ratio, since `||T x'||_p >= <w, T x'> = ||T w||_{p'} >= <T w, x> = ||T x||_p`
/// for normalised `x`.
fn power_ascent(start: &ComplexMatrix, p: Exponent, opts: &SolverOptions) -> Result<Ascent> {
    let q = p.conjugate();
    let mut x = start.scale_real(1.0 / schatten_norm(start, p)?);
    let mut ratio = schatten_norm(&triangular(&x)?, p)?;
    let mut rel_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let tx = triangular(&x)?;
        if tx.is_zero() {
            break;
        }
        let w = dual_element(&tx, p)?;
        let tw = triangular(&w)?;
        if tw.is_zero() {
            break;
        }
        let next = dual_element(&tw, q)?;
        let nn = schatten_norm(&next, p)?;
        if nn == 0.0 {
            break;
        }
        let next = next.scale_real(1.0 / nn);
        let r = schatten_norm(&triangular(&next)?, p)?;
        rel_change = (r - ratio) / ratio.max(f64::MIN_POSITIVE);
        if r >= ratio {
            x = next;
            ratio = r;
        }
        if rel_change.abs() <= opts.tolerance {
            break;
        }
    }
    Ok(Ascent {
        x,
        ratio,
        iterations,
        rel_change: rel_change.abs(),
        converged: rel_change.abs() <= opts.tolerance,
    })
}

/// Lower bound on `t_{p,n}` by dual power iteration from the identity, the
/// Hilbert matrix and `opts.restarts` complex Gaussian starts.
///
/// The reported bound is the exact ratio of the returned witness. For
/// `p = 1` the `p = infinity` problem is solved and its witness is
/// dualised into a rank-one `S_1` witness, which attains at least the same
/// ratio (`t_1 = t_inf`).
pub fn triproj_norm_estimate(
    n: usize,
    p: Exponent,
    opts: &SolverOptions,
) -> Result<ConstantEstimate> {
    triproj_norm_estimate_seeded(n, p, opts, &[], Execution::default())
}

/// As [`triproj_norm_estimate`], with extra starting matrices (smaller ones
/// are zero-padded to `n x n`, so a chain over increasing `n` stays monotone).
pub fn triproj_norm_estimate_seeded(
    n: usize,
    p: Exponent,
    opts: &SolverOptions,
    seeds: &[ComplexMatrix],
    exec: Execution,
) -> Result<ConstantEstimate> {
    if n == 0 {
        return Err(Error::input("t_{p,n} needs n >= 1"));
    }
    if p == Exponent::ONE {
        let est = triproj_norm_estimate_seeded(n, Exponent::INFINITY, opts, seeds, exec)?;
        let Witness::Matrix(x) = &est.witness else {
            unreachable!("triangular estimates carry matrix witnesses")
        };
        let w = dual_to_trace_class(x)?;
        let direct = triangular_ratio(&w, p)?;
        return Ok(ConstantEstimate {
            p,
            lower_bound: direct,
            witness: Witness::Matrix(w),
            ..est
        });
    }

    let starts: Vec<ComplexMatrix> = [ComplexMatrix::identity(n), hilbert_matrix(n)?]
        .into_iter()
        .chain(
            seeds
                .iter()
                .filter(|s| s.is_square() && s.rows() <= n)
                .map(|s| s.embed(n)),
        )
        .filter(|s| !s.is_zero())
        .collect();
    let fixed = starts.len();
    let runs = map_indices(exec, fixed + opts.restarts, |r| {
        let start = if r < fixed {
            starts[r].clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(opts.seed, r as u64));
            gaussian_matrix(&mut rng, n, n)
        };
        power_ascent(&start, p, opts)
    });
    let mut best: Option<Ascent> = None;
    let mut iterations = 0;
    let mut all_converged = true;
    for run in runs {
        let run = run?;
        iterations += run.iterations;
        all_converged &= run.converged;
        if best.as_ref().is_none_or(|b| run.ratio > b.ratio) {
            best = Some(run);
        }
    }
    let best = best.expect("the identity is always a start");
    let lower_bound = triangular_ratio(&best.x, p)?;
    Ok(ConstantEstimate {
        kind: EstimateKind::Triproj,
        n,
        p,
        lower_bound,
        witness: Witness::Matrix(best.x),
        iterations,
        seed: opts.seed,
        converged: all_converged,
        rel_gap: best.rel_change.min(1.0).max(opts.tolerance),
    })
}

/// From an `S_inf` witness `x`, the rank-one `S_1` witness `g = u v*` built
/// from the top singular pair of `T x`. Since `T` is self-adjoint for
/// `Re Tr(a* b)`, `||T x||_inf = <g, T x> = <T g, x> <= ||T g||_1 ||x||_inf`,
/// so `g` has `S_1` ratio at least that of `x` in `S_inf`.
fn dual_to_trace_class(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    dual_element(&triangular(x)?, Exponent::INFINITY)
}
