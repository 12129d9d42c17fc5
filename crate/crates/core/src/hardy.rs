//! Hardy-space norms on the matrix filtration.
//!
//! For `p >= 2`, `||x||_{H^p}` is the larger of the column and row square
//! functions and is computed exactly. For `1 <= p < 2` it is the infimum of
//! `||S_c(y)||_p + ||S_r(z)||_p` over splittings `x = y + z`; the solver here
//! returns the best splitting it finds, so the value is an upper bound.
//!
//! Square functions are evaluated from terminal matrices without building
//! increment lists: since filtration levels partition the entries,
//! `sum_k (d_k w)* (d_k w)` is the Gram matrix of `w` restricted to pairs of
//! entries in the same row and level.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filtration::{increments, FiltrationKind, FiltrationSpec, MartingaleSeq};
use crate::matcore::{
    add_outer, eigh, max_eigenvalue, min_eigenvalue, psd_quasi_norm, schatten_norm,
    smoothed_norm_grad, ComplexMatrix, Exponent, Side, ZERO,
};
use crate::par::{map_indices, Execution};
use crate::solver::{gaussian_matrix, split_seed, SolverOptions, SolverStatus};

/// `sum_k (d_k w)* (d_k w)` (column) or `sum_k (d_k w)(d_k w)*` (row).
pub fn square_gram(w: &ComplexMatrix, spec: FiltrationSpec, side: Side) -> Result<ComplexMatrix> {
    let n = spec.ambient_n();
    if w.shape() != (n, n) {
        return Err(Error::shape(format!(
            "{}x{} matrix on a filtration of size {n}",
            w.rows(),
            w.cols()
        )));
    }
    let mut g = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut s = ZERO;
            for i in 0..n {
                let (u, v, same) = match side {
                    Side::Column => (w[(i, a)], w[(i, b)], spec.level(i, a) == spec.level(i, b)),
                    Side::Row => (w[(b, i)], w[(a, i)], spec.level(a, i) == spec.level(b, i)),
                };
                if same {
                    s += u.conj() * v;
                }
            }
            g[(a, b)] = s;
            g[(b, a)] = s.conj();
        }
    }
    Ok(g)
}

/// `|| S(w) ||_p` for the column or row square function of the martingale
/// with terminal value `w`.
pub fn square_norm(
    w: &ComplexMatrix,
    spec: FiltrationSpec,
    side: Side,
    p: Exponent,
) -> Result<f64> {
    Ok(psd_quasi_norm(&square_gram(w, spec, side)?, p.half())?.sqrt())
}

/// `sum_k d_k(d_k(w) m)` (column) or `sum_k d_k(m d_k(w))` (row): the
/// gradient kernel of the square-function norms.
fn masked_product(
    w: &ComplexMatrix,
    m: &ComplexMatrix,
    spec: FiltrationSpec,
    side: Side,
) -> ComplexMatrix {
    let n = spec.ambient_n();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let lvl = spec.level(i, j);
        let mut s = ZERO;
        for l in 0..n {
            match side {
                Side::Column if spec.level(i, l) == lvl => s += w[(i, l)] * m[(l, j)],
                Side::Row if spec.level(l, j) == lvl => s += m[(i, l)] * w[(l, j)],
                _ => {}
            }
        }
        s
    })
}

fn require_high(p: Exponent) -> Result<()> {
    if !p.at_least_two() {
        return Err(Error::domain(format!(
            "H^p for p = {p} < 2 is an infimum; use hardy_norm_low"
        )));
    }
    Ok(())
}

fn require_low(p: Exponent) -> Result<()> {
    if p.at_least_two() {
        return Err(Error::domain(format!("p = {p} >= 2; use hardy_norm_high")));
    }
    Ok(())
}

/// `max(||S_c(x)||_p, ||S_r(x)||_p)` for `p >= 2`.
pub fn hardy_norm_high(m: &MartingaleSeq, p: Exponent) -> Result<f64> {
    hardy_norm_high_terminal(&m.terminal(), m.spec(), p)
}

/// [`hardy_norm_high`] from the terminal matrix.
pub fn hardy_norm_high_terminal(
    x: &ComplexMatrix,
    spec: FiltrationSpec,
    p: Exponent,
) -> Result<f64> {
    require_high(p)?;
    let c = square_norm(x, spec, Side::Column, p)?;
    let r = square_norm(x, spec, Side::Row, p)?;
    Ok(c.max(r))
}

/// A splitting `d_k x = y_k + z_k`; `y` is measured by the column square
/// function and `z` by the row one.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    y: MartingaleSeq,
    z: MartingaleSeq,
}

impl Decomposition {
    pub fn new(y: MartingaleSeq, z: MartingaleSeq) -> Result<Self> {
        if y.spec() != z.spec() {
            return Err(Error::input(
                "decomposition halves live on different filtrations",
            ));
        }
        Ok(Decomposition { y, z })
    }

    /// Splitting with row part the martingale generated by `z`.
    pub fn from_row_part(
        x: &ComplexMatrix,
        z: &ComplexMatrix,
        spec: FiltrationSpec,
    ) -> Result<Self> {
        let y = x - z;
        Ok(Decomposition {
            y: increments(&y, spec)?,
            z: increments(z, spec)?,
        })
    }

    pub fn y_increments(&self) -> &[ComplexMatrix] {
        self.y.increments()
    }

    pub fn z_increments(&self) -> &[ComplexMatrix] {
        self.z.increments()
    }

    pub fn y_terminal(&self) -> ComplexMatrix {
        self.y.terminal()
    }

    pub fn z_terminal(&self) -> ComplexMatrix {
        self.z.terminal()
    }

    pub fn spec(&self) -> FiltrationSpec {
        self.y.spec()
    }

    /// `||S_c(y)||_p + ||S_r(z)||_p`.
    pub fn value(&self, p: Exponent) -> Result<f64> {
        let spec = self.spec();
        Ok(square_norm(&self.y_terminal(), spec, Side::Column, p)?
            + square_norm(&self.z_terminal(), spec, Side::Row, p)?)
    }

    /// Largest `|y_k + z_k - d_k x|` over all entries.
    pub fn residual(&self, m: &MartingaleSeq) -> f64 {
        self.y
            .increments()
            .iter()
            .zip(self.z.increments())
            .zip(m.increments())
            .map(|((y, z), d)| (y + z).max_abs_diff(d))
            .fold(0.0, f64::max)
    }
}

/// Which half of the splitting, if any, is forced to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pin {
    #[default]
    Free,
    /// `z = 0`: the value is the column square function of `x`.
    ZeroRow,
    /// `y = 0`: the value is the row square function of `x`.
    ZeroColumn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowNorm {
    /// Best `||S_c(y)||_p + ||S_r(z)||_p` found; an upper bound on `||x||_{H^p}`.
    pub value: f64,
    pub decomposition: Decomposition,
    pub status: SolverStatus,
}

/// Upper bound on `||x||_{H^p}`, `1 <= p < 2`, by minimising over the row
/// part `z` (a full matrix; its increments come from the filtration).
pub fn hardy_norm_low(m: &MartingaleSeq, p: Exponent, opts: &SolverOptions) -> Result<LowNorm> {
    hardy_norm_low_with(m, p, opts, Pin::Free)
}

pub fn hardy_norm_low_with(
    m: &MartingaleSeq,
    p: Exponent,
    opts: &SolverOptions,
    pin: Pin,
) -> Result<LowNorm> {
    require_low(p)?;
    let spec = m.spec();
    let x = m.terminal();
    let n = spec.ambient_n();
    let exact = |z: &ComplexMatrix| -> Result<f64> {
        Ok(square_norm(&(&x - z), spec, Side::Column, p)? + square_norm(z, spec, Side::Row, p)?)
    };
    let zero = ComplexMatrix::zeros(n, n);
    let fixed_point = |z: ComplexMatrix| -> Result<LowNorm> {
        Ok(LowNorm {
            value: exact(&z)?,
            decomposition: Decomposition::from_row_part(&x, &z, spec)?,
            status: SolverStatus {
                converged: true,
                iterations: 0,
                rel_change: 0.0,
            },
        })
    };
    match pin {
        Pin::ZeroRow => return fixed_point(zero),
        Pin::ZeroColumn => return fixed_point(x.clone()),
        Pin::Free => {}
    }
    let scale = x.frobenius_norm();
    if scale == 0.0 {
        return fixed_point(zero);
    }

    let upper = strictly_upper(&x);
    let starts = [zero, x.clone(), x.scale_real(0.5), upper];
    let fixed = starts.len();
    let runs = map_indices(
        Execution::default(),
        fixed + opts.restarts,
        |r| -> Result<(ComplexMatrix, f64, SolverStatus)> {
            let start = if r < fixed {
                starts[r].clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(split_seed(opts.seed, r as u64));
                let g = gaussian_matrix(&mut rng, n, n);
                g.scale_real(scale / g.frobenius_norm())
            };
            let (z, status) = descend_low(&x, start, spec, p, opts, scale)?;
            Ok((z.clone(), exact(&z)?, status))
        },
    );

    let mut best: Option<(ComplexMatrix, f64)> = None;
    let mut status: Option<SolverStatus> = None;
    for run in runs {
        let (z, v, s) = run?;
        status = Some(status.map_or(s, |t| t.merge(s)));
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((z, v));
        }
    }
    let (z, value) = best.expect("fixed starts are always present");
    Ok(LowNorm {
        value,
        decomposition: Decomposition::from_row_part(&x, &z, spec)?,
        status: status.expect("fixed starts are always present"),
    })
}

/// Smoothed `||(G + eps^2)^(1/2)||_p` of a square-function Gram matrix and the
/// kernel `(G + eps^2)^((p-2)/2)` scaled by the norm's `1 - p` power.
fn smoothed_square(g: &ComplexMatrix, p: f64, eps: f64) -> Result<(f64, ComplexMatrix)> {
    let e = eigh(g)?;
    let e2 = eps * eps;
    let shifted: Vec<f64> = e.values.iter().map(|&l| l.max(0.0) + e2).collect();
    let sum: f64 = shifted.iter().map(|&l| l.powf(p / 2.0)).sum();
    let value = sum.powf(1.0 / p);
    let factor = value.powf(1.0 - p);
    let kernel = e.apply(|l| (l.max(0.0) + e2).powf((p - 2.0) / 2.0) * factor);
    Ok((value, kernel))
}

fn low_objective(
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    spec: FiltrationSpec,
    p: f64,
    eps: f64,
) -> Result<(f64, ComplexMatrix)> {
    let y = x - z;
    let (c, mc) = smoothed_square(&square_gram(&y, spec, Side::Column)?, p, eps)?;
    let (r, mr) = smoothed_square(&square_gram(z, spec, Side::Row)?, p, eps)?;
    let grad =
        masked_product(z, &mr, spec, Side::Row) - masked_product(&y, &mc, spec, Side::Column);
    Ok((c + r, grad))
}

/// Gradient descent with Armijo backtracking on the smoothed objective,
/// continuing the smoothing parameter from `1e-2 * scale` down to
/// `1e-9 * scale`.
fn descend_low(
    x: &ComplexMatrix,
    mut z: ComplexMatrix,
    spec: FiltrationSpec,
    p: Exponent,
    opts: &SolverOptions,
    scale: f64,
) -> Result<(ComplexMatrix, SolverStatus)> {
    let p = p.finite().expect("p < 2 is finite");
    let stages: Vec<f64> = (2..=9).map(|k| scale * 10f64.powi(-k)).collect();
    let per_stage = (opts.max_iterations / stages.len()).max(1);
    let mut iterations = 0;
    let mut rel_change = f64::INFINITY;
    let mut step = 0.1 * scale.max(1e-300);
    for &eps in &stages {
        let (mut f, mut g) = low_objective(x, &z, spec, p, eps)?;
        for _ in 0..per_stage {
            iterations += 1;
            let gn2 = g.frobenius_norm().powi(2);
            if gn2 == 0.0 {
                rel_change = 0.0;
                break;
            }
            let mut accepted = false;
            let mut t = step / gn2.sqrt();
            for _ in 0..40 {
                let mut cand = z.clone();
                cand.axpy(-t, &g);
                let (fc, gc) = low_objective(x, &cand, spec, p, eps)?;
                if fc <= f - 1e-4 * t * gn2 {
                    rel_change = (f - fc) / f.max(f64::MIN_POSITIVE);
                    z = cand;
                    f = fc;
                    g = gc;
                    accepted = true;
                    step = (2.0 * t * gn2.sqrt()).min(scale);
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                rel_change = 0.0;
                step = (t * gn2.sqrt()).max(1e-12 * scale);
                break;
            }
            if rel_change <= opts.tolerance {
                break;
            }
        }
    }
    Ok((
        z,
        SolverStatus {
            converged: rel_change <= opts.tolerance,
            iterations,
            rel_change,
        },
    ))
}

fn strictly_upper(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    ComplexMatrix::from_fn(n, n, |i, j| if i < j { x[(i, j)] } else { ZERO })
}

/// The splitting `x = (Diag(x) + L(x)) + U(x)` on the augmented filtration:
/// the diagonal and strictly lower part go to the column side, where their
/// increments are row matrices, and the strictly upper part (the triangular
/// projection of the off-diagonal part) goes to the row side, where its
/// increments are column matrices. Hence its value at `p = 1` is at most
/// `||Diag x||_1 + ||L x||_1 + ||U x||_1`.
pub fn triangular_splitting(x: &ComplexMatrix) -> Result<Decomposition> {
    let n = x.require_square("triangular_splitting")?;
    let spec = FiltrationSpec::augmented(n)?;
    Decomposition::from_row_part(x, &strictly_upper(x), spec)
}

/// `sum_k E_{k-1}(d_k x (d_k x)*)` with `E_0 = 0`, on the corner filtration.
pub fn conditioned_bracket(m: &MartingaleSeq) -> Result<ComplexMatrix> {
    let spec = m.spec();
    if spec.kind() != FiltrationKind::Corner {
        return Err(Error::input(
            "conditioned bracket is defined on the corner filtration",
        ));
    }
    let n = spec.ambient_n();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (k, d) in m.increments().iter().enumerate() {
        // E_{k-1} keeps the leading k x k block (0-based hook index k).
        for j in 0..n {
            let col: Vec<_> = (0..k).map(|i| d[(i, j)]).collect();
            add_outer(&mut acc, &col);
        }
    }
    Ok(acc)
}

/// Feasible dominant `y >= x_k` for all `k`, with `value = ||y||_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCertificate {
    pub dominant: ComplexMatrix,
    pub value: f64,
    pub status: SolverStatus,
}

fn check_psd_family(xs: &[ComplexMatrix]) -> Result<usize> {
    let first = xs
        .first()
        .ok_or_else(|| Error::input("empty positive sequence"))?;
    let n = first.require_square("positive sequence")?;
    for x in xs {
        if x.shape() != (n, n) {
            return Err(Error::shape("positive sequence of mixed sizes"));
        }
        let scale = x.max_abs().max(1.0);
        if !x.is_hermitian(1e-10 * scale) {
            return Err(Error::input("sequence element is not Hermitian"));
        }
    }
    Ok(n)
}

/// Smallest shift `lambda >= 0` with `y + lambda I >= x_k` for every `k`.
fn feasibility_shift(y: &ComplexMatrix, xs: &[ComplexMatrix]) -> Result<f64> {
    xs.iter()
        .map(|x| max_eigenvalue(&(x - y).hermitian_part()))
        .try_fold(0.0f64, |acc, l| Ok(acc.max(l?)))
}

fn shifted(y: &ComplexMatrix, lambda: f64) -> ComplexMatrix {
    let n = y.rows();
    y + &ComplexMatrix::identity(n).scale_real(lambda)
}

/// Upper bound on `inf { ||y||_p : y >= x_k for all k }` for a positive
/// sequence, by a quadratic penalty on `(x_k - y)_+` with geometrically
/// increasing weight and a final shift `y + lambda I` restoring feasibility.
pub fn hardy_max_norm_pos(
    xs: &[ComplexMatrix],
    p: Exponent,
    opts: &SolverOptions,
) -> Result<MaxCertificate> {
    let n = check_psd_family(xs)?;
    let xs: Vec<ComplexMatrix> = xs.iter().map(ComplexMatrix::hermitian_part).collect();
    let scale = xs.iter().map(|x| x.frobenius_norm()).fold(0.0, f64::max);
    let mut candidates: Vec<(ComplexMatrix, SolverStatus)> = Vec::new();
    let done = SolverStatus {
        converged: true,
        iterations: 0,
        rel_change: 0.0,
    };
    let sum = xs
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, x| acc + x.clone());
    candidates.push((sum.clone(), done));
    if scale > 0.0 {
        let starts: Vec<ComplexMatrix> = std::iter::once(sum).chain(xs.iter().cloned()).collect();
        let fixed = starts.len();
        let runs = map_indices(Execution::default(), fixed + opts.restarts, |r| {
            let start = if r < fixed {
                starts[r].clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(split_seed(opts.seed, r as u64));
                let g = gaussian_matrix(&mut rng, n, n);
                g.cogram().scale_real(scale / g.frobenius_norm().powi(2))
            };
            penalty_descent(&xs, start, p, opts, scale)
        });
        for run in runs {
            candidates.push(run?);
        }
    }
    let mut best: Option<MaxCertificate> = None;
    let mut status: Option<SolverStatus> = None;
    for (y, s) in candidates {
        status = Some(status.map_or(s, |t| t.merge(s)));
        let y = shifted(&y, feasibility_shift(&y, &xs)?).hermitian_part();
        let value = schatten_norm(&y, p)?;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(MaxCertificate {
                dominant: y,
                value,
                status: done,
            });
        }
    }
    let mut best = best.expect("the sum is always a candidate");
    best.status = status.expect("the sum is always a candidate");
    Ok(best)
}

fn penalty_objective(
    xs: &[ComplexMatrix],
    y: &ComplexMatrix,
    p: Exponent,
    rho: f64,
    eps: f64,
) -> Result<(f64, ComplexMatrix)> {
    let (norm, g) = smoothed_norm_grad(y, p, eps)?;
    let mut grad = g.hermitian_part();
    let mut pen = 0.0;
    for x in xs {
        let e = eigh(&(x - y))?;
        let pos: f64 = e.values.iter().map(|&l| l.max(0.0).powi(2)).sum();
        if pos > 0.0 {
            pen += pos;
            grad.axpy(-2.0 * rho, &e.apply(|l| l.max(0.0)));
        }
    }
    Ok((norm + rho * pen, grad))
}

fn penalty_descent(
    xs: &[ComplexMatrix],
    mut y: ComplexMatrix,
    p: Exponent,
    opts: &SolverOptions,
    scale: f64,
) -> Result<(ComplexMatrix, SolverStatus)> {
    let rhos: Vec<f64> = (0..8).map(|k| 10f64.powi(k) / scale).collect();
    let per_stage = (opts.max_iterations / rhos.len()).max(1);
    let eps = 1e-9 * scale;
    let mut iterations = 0;
    let mut rel_change = f64::INFINITY;
    for &rho in &rhos {
        let (mut f, mut g) = penalty_objective(xs, &y, p, rho, eps)?;
        let mut step = 0.1 * scale;
        for _ in 0..per_stage {
            iterations += 1;
            let gn = g.frobenius_norm();
            if gn == 0.0 {
                rel_change = 0.0;
                break;
            }
            let mut t = step / gn;
            let mut accepted = false;
            for _ in 0..50 {
                let mut cand = y.clone();
                cand.axpy(-t, &g);
                let cand = cand.hermitian_part();
                let (fc, gc) = penalty_objective(xs, &cand, p, rho, eps)?;
                if fc <= f - 1e-4 * t * gn * gn {
                    rel_change = (f - fc) / f.abs().max(f64::MIN_POSITIVE);
                    y = cand;
                    f = fc;
                    g = gc;
                    step = (2.0 * t * gn).min(scale);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted || rel_change <= opts.tolerance {
                if !accepted {
                    rel_change = 0.0;
                }
                break;
            }
        }
    }
    Ok((
        y,
        SolverStatus {
            converged: rel_change <= opts.tolerance,
            iterations,
            rel_change,
        },
    ))
}

/// Certified lower bound on `inf { ||y||_p : y >= x_k }` from positive
/// weights `w_k`: for feasible `y`,
/// `||y||_p ||W||_{p'} >= Tr(y W) >= sum_k Tr(x_k w_k)` with `W = sum_k w_k`.
pub fn hmax_dual_bound(
    xs: &[ComplexMatrix],
    weights: &[ComplexMatrix],
    p: Exponent,
) -> Result<f64> {
    if xs.len() != weights.len() {
        return Err(Error::shape(format!(
            "{} weights for {} elements",
            weights.len(),
            xs.len()
        )));
    }
    let n = check_psd_family(xs)?;
    check_psd_family(weights)?;
    for w in weights {
        if min_eigenvalue(w)? < -1e-12 * w.max_abs() {
            return Err(Error::input("dual weights must be positive semidefinite"));
        }
    }
    let mut total = ComplexMatrix::zeros(n, n);
    let mut pairing = 0.0;
    for (x, w) in xs.iter().zip(weights) {
        pairing += x.real_inner(w);
        total += w;
    }
    let den = schatten_norm(&total, p.conjugate())?;
    if den == 0.0 {
        return Err(Error::UndefinedRatio("zero weights".into()));
    }
    Ok(pairing.max(0.0) / den)
}
