use serde::{Deserialize, Serialize};

use super::InequalityKind;
use crate::error::{Error, Result};
use crate::filtration::{transform_terminal, FiltrationKind, FiltrationSpec, SignVector};
use crate::hardy::{hardy_norm_high_terminal, hmax_dual_bound, square_norm, triangular_splitting};
use crate::matcore::{
    c64, min_eigenvalue, psd_quasi_norm, schatten_norm, weak_l1_norm, ComplexMatrix, Exponent,
    Side, SquareFunction, ZERO,
};

/// A sequence `(a_1, ..., a_n)` of `n x n` matrices, stored densely or
/// generated from a single matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "data", rename_all = "snake_case")]
pub enum SequenceInput {
    Dense(Vec<ComplexMatrix>),
    /// `a_k` has row `k` equal to the conjugate of column `k` of the matrix,
    /// i.e. `a_k = c_k*` for the column matrix `c_k`; then `sum a_k* a_k = a a*`.
    AdjointColumns(ComplexMatrix),
    /// `a_k = c_k c_k*` for the column matrix `c_k`.
    ColumnOuters(ComplexMatrix),
}

impl SequenceInput {
    pub fn len(&self) -> usize {
        match self {
            SequenceInput::Dense(v) => v.len(),
            SequenceInput::AdjointColumns(a) | SequenceInput::ColumnOuters(a) => a.cols(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Common size `n` of the items; also checks there are `n` of them.
    pub fn size(&self) -> Result<usize> {
        let n = match self {
            SequenceInput::Dense(v) => {
                let first = v.first().ok_or_else(|| Error::input("empty sequence"))?;
                let n = first.require_square("sequence item")?;
                if v.iter().any(|x| x.shape() != (n, n)) {
                    return Err(Error::shape("sequence items of mixed sizes"));
                }
                n
            }
            SequenceInput::AdjointColumns(a) | SequenceInput::ColumnOuters(a) => {
                a.require_square("sequence generator")?
            }
        };
        if self.len() != n {
            return Err(Error::shape(format!(
                "{} items for a filtration of length {n}",
                self.len()
            )));
        }
        Ok(n)
    }

    /// Item `k` (0-based).
    pub fn item(&self, k: usize) -> ComplexMatrix {
        match self {
            SequenceInput::Dense(v) => v[k].clone(),
            SequenceInput::AdjointColumns(a) => {
                let n = a.rows();
                let mut m = ComplexMatrix::zeros(n, n);
                for i in 0..n {
                    m[(k, i)] = a[(i, k)].conj();
                }
                m
            }
            SequenceInput::ColumnOuters(a) => {
                let v = a.column(k);
                ComplexMatrix::from_fn(a.rows(), a.rows(), |i, j| v[i] * v[j].conj())
            }
        }
    }

    pub fn items(&self) -> impl Iterator<Item = ComplexMatrix> + '_ {
        (0..self.len()).map(|k| self.item(k))
    }

    pub fn to_dense(&self) -> Vec<ComplexMatrix> {
        self.items().collect()
    }

    /// Zero-pads every item to `n x n` and appends zero items up to length `n`.
    pub fn embed(&self, n: usize) -> SequenceInput {
        let mut items: Vec<ComplexMatrix> = self.items().map(|x| x.embed(n)).collect();
        items.resize(n, ComplexMatrix::zeros(n, n));
        SequenceInput::Dense(items)
    }
}

/// Input of a ratio functional; which variant a kind accepts is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RatioInput {
    /// The martingale `x_k = E_k(terminal)`. For `BG_UPPER` with `p < 2` an
    /// optional row part `z` supplies an explicit splitting.
    Martingale {
        terminal: ComplexMatrix,
        filtration: FiltrationKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        row_part: Option<ComplexMatrix>,
    },
    Transform {
        terminal: ComplexMatrix,
        filtration: FiltrationKind,
        signs: SignVector,
    },
    /// One item per filtration level.
    Sequence {
        items: SequenceInput,
        filtration: FiltrationKind,
    },
    /// A positive terminal matrix on the augmented filtration together with
    /// positive dual weights certifying its maximal norm from below.
    HmaxGap {
        x: ComplexMatrix,
        weights: SequenceInput,
    },
}

impl RatioInput {
    /// The ambient size `n`.
    pub fn size(&self) -> Result<usize> {
        match self {
            RatioInput::Martingale { terminal, .. } | RatioInput::Transform { terminal, .. } => {
                terminal.require_square("terminal matrix")
            }
            RatioInput::Sequence { items, .. } => items.size(),
            RatioInput::HmaxGap { x, .. } => x.require_square("terminal matrix"),
        }
    }

    /// The same input zero-padded to `n x n`; sign vectors are extended by
    /// `+1`. Ratios are unchanged by embedding.
    pub fn embed(&self, n: usize) -> RatioInput {
        match self {
            RatioInput::Martingale {
                terminal,
                filtration,
                row_part,
            } => RatioInput::Martingale {
                terminal: terminal.embed(n),
                filtration: *filtration,
                row_part: row_part.as_ref().map(|z| z.embed(n)),
            },
            RatioInput::Transform {
                terminal,
                filtration,
                signs,
            } => {
                let mut s = signs.signs().to_vec();
                s.resize(n, 1);
                RatioInput::Transform {
                    terminal: terminal.embed(n),
                    filtration: *filtration,
                    signs: SignVector::new(s).expect("padding with +1"),
                }
            }
            RatioInput::Sequence { items, filtration } => RatioInput::Sequence {
                items: items.embed(n),
                filtration: *filtration,
            },
            RatioInput::HmaxGap { x, weights } => RatioInput::HmaxGap {
                x: x.embed(n),
                weights: weights.embed(n),
            },
        }
    }
}

fn quotient(num: f64, den: f64, what: &str) -> Result<f64> {
    if den == 0.0 || !den.is_finite() {
        return Err(Error::UndefinedRatio(format!("{what} vanishes")));
    }
    Ok(num / den)
}

fn mismatch(kind: InequalityKind) -> Error {
    Error::input(format!("input variant does not match {kind}"))
}

/// Evaluates the ratio functional of `kind` on `input` at exponent `p`:
///
/// - `BG_LOWER`: `||x||_{H^p} / ||x||_p`, `p >= 2`;
/// - `BG_UPPER`: `||x||_p / ||x||_{H^p}`, where for `p < 2` the denominator
///   is the best of the supplied splitting and the two one-sided ones (so the
///   ratio stays a lower bound for the constant);
/// - `STEIN`: `||S_c(E_k a_k)||_p / ||S_c(a_k)||_p`;
/// - `DOOB_DUAL`: `||sum E_k a_k||_p / ||sum a_k||_p` for positive `a_k`;
/// - `TRANSFORM`: `||sum eps_k d_k x||_p / ||x||_p`;
/// - `TRANSFORM_WEAK`: the same with the weak-L1 numerator, `p = 1`;
/// - `HMAX_GAP`: the dual lower bound on `||(E~_k x)||_{H^p_max}` divided by
///   an upper bound on `||x||_{H^p}`.
pub fn ratio(kind: InequalityKind, input: &RatioInput, p: Exponent) -> Result<f64> {
    let n = input.size()?;
    match (kind, input) {
        (
            InequalityKind::BgLower,
            RatioInput::Martingale {
                terminal,
                filtration,
                ..
            },
        ) => {
            if !p.at_least_two() {
                return Err(Error::domain(format!(
                    "BG_LOWER needs p >= 2; for p = {p} only upper bounds on H^p are available"
                )));
            }
            let spec = FiltrationSpec::new(n, *filtration)?;
            quotient(
                hardy_norm_high_terminal(terminal, spec, p)?,
                schatten_norm(terminal, p)?,
                "||x||_p",
            )
        }
        (
            InequalityKind::BgUpper,
            RatioInput::Martingale {
                terminal,
                filtration,
                row_part,
            },
        ) => {
            let spec = FiltrationSpec::new(n, *filtration)?;
            let den = if p.at_least_two() {
                hardy_norm_high_terminal(terminal, spec, p)?
            } else {
                hardy_upper(terminal, spec, p, row_part.as_ref())?
            };
            quotient(schatten_norm(terminal, p)?, den, "H^p norm")
        }
        (InequalityKind::Stein, RatioInput::Sequence { items, filtration }) => {
            let spec = FiltrationSpec::new(n, *filtration)?;
            let mut num = SquareFunction::new(n, Side::Column);
            let mut den = SquareFunction::new(n, Side::Column);
            for (k, a) in items.items().enumerate() {
                num.add(&spec.expectation(&a, k + 1)?)?;
                den.add(&a)?;
            }
            quotient(num.norm(p)?, den.norm(p)?, "column square function")
        }
        (InequalityKind::DoobDual, RatioInput::Sequence { items, filtration }) => {
            let spec = FiltrationSpec::new(n, *filtration)?;
            if let SequenceInput::Dense(v) = items {
                check_positive(v)?;
            }
            let mut num = ComplexMatrix::zeros(n, n);
            let mut den = ComplexMatrix::zeros(n, n);
            for (k, a) in items.items().enumerate() {
                num += &spec.expectation(&a, k + 1)?;
                den += &a;
            }
            let q = p.finite().unwrap_or(f64::INFINITY);
            quotient(
                psd_quasi_norm(&num, q)?,
                psd_quasi_norm(&den, q)?,
                "||sum a_k||_p",
            )
        }
        (
            InequalityKind::Transform,
            RatioInput::Transform {
                terminal,
                filtration,
                signs,
            },
        ) => {
            let spec = FiltrationSpec::new(n, *filtration)?;
            let t = transform_terminal(terminal, spec, signs)?;
            quotient(
                schatten_norm(&t, p)?,
                schatten_norm(terminal, p)?,
                "||x||_p",
            )
        }
        (
            InequalityKind::TransformWeak,
            RatioInput::Transform {
                terminal,
                filtration,
                signs,
            },
        ) => {
            if p != Exponent::ONE {
                return Err(Error::domain(format!(
                    "TRANSFORM_WEAK is defined at p = 1, not {p}"
                )));
            }
            let spec = FiltrationSpec::new(n, *filtration)?;
            let t = transform_terminal(terminal, spec, signs)?;
            quotient(weak_l1_norm(&t)?, schatten_norm(terminal, p)?, "||x||_1")
        }
        (InequalityKind::HmaxGap, RatioInput::HmaxGap { x, weights }) => {
            let x = x.hermitian_part();
            check_positive(std::slice::from_ref(&x))?;
            if weights.size()? != n {
                return Err(Error::shape("weights and terminal differ in size"));
            }
            let spec = FiltrationSpec::augmented(n)?;
            let seq = (1..=n)
                .map(|k| spec.expectation(&x, k))
                .collect::<Result<Vec<_>>>()?;
            let lower = hmax_dual_bound(&seq, &weights.to_dense(), p)?;
            let upper = if p.at_least_two() {
                hardy_norm_high_terminal(&x, spec, p)?
            } else {
                let split = triangular_splitting(&x)?.value(p)?;
                hardy_upper(&x, spec, p, None)?.min(split)
            };
            quotient(lower, upper, "H^p norm")
        }
        _ => Err(mismatch(kind)),
    }
}

/// `min(||S_c(x - z)|| + ||S_r(z)||, ||S_c(x)||, ||S_r(x)||)`: an upper bound
/// on `||x||_{H^p}` for `p < 2`.
pub fn hardy_upper(
    x: &ComplexMatrix,
    spec: FiltrationSpec,
    p: Exponent,
    z: Option<&ComplexMatrix>,
) -> Result<f64> {
    let mut best = square_norm(x, spec, Side::Column, p)?.min(square_norm(x, spec, Side::Row, p)?);
    if let Some(z) = z {
        if z.shape() != x.shape() {
            return Err(Error::shape("row part and terminal differ in size"));
        }
        best = best.min(
            square_norm(&(x - z), spec, Side::Column, p)? + square_norm(z, spec, Side::Row, p)?,
        );
    }
    Ok(best)
}

fn check_positive(xs: &[ComplexMatrix]) -> Result<()> {
    for x in xs {
        let scale = x.max_abs();
        if !x.is_hermitian(1e-10 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::input("sequence item is not Hermitian"));
        }
        if scale > 0.0 && min_eigenvalue(x)? < -1e-10 * scale {
            return Err(Error::input("sequence item is not positive semidefinite"));
        }
    }
    Ok(())
}

/// The column matrix `c_k` (column `k` of `a`, zero elsewhere).
pub fn column_matrix(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(
        a.rows(),
        a.cols(),
        |i, j| if j == k { a[(i, k)] } else { ZERO },
    )
}

/// Rank-one `v v*`.
pub fn outer(v: &[c64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}
