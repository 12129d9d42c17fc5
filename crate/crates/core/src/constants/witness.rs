use super::ratio::{ratio, RatioInput, SequenceInput};
use super::{ConstantEstimate, EstimateKind, InequalityKind, Witness};
use crate::error::{Error, Result};
use crate::filtration::{FiltrationKind, FiltrationSpec};
use crate::matcore::{eigh, ComplexMatrix, Exponent};
use crate::triproj::hilbert_matrix;

/// The explicit Hilbert-matrix input for `kind` at size `n`, and the
/// exponent at which its ratio is evaluated.
///
/// - `BG_LOWER`: the martingale generated by `h`.
/// - `STEIN`: `a_k = c_k*` for the columns `c_k` of `h`; the ratio is
///   `||T h||_p / ||h||_p`.
/// - `DOOB_DUAL`: `b_k = c_k c_k*`, evaluated at `p / 2`; the ratio is
///   `(||T h||_p / ||h||_p)^2`.
/// - `HMAX_GAP`: `x = v v*` for the top eigenvector `v` of
///   `sum_k E~_k(b_k)`, with the `b_k` as dual weights.
pub fn hilbert_input(
    kind: InequalityKind,
    n: usize,
    p: Exponent,
) -> Result<(RatioInput, Exponent)> {
    let h = hilbert_matrix(n)?;
    let input = match kind {
        InequalityKind::BgLower => RatioInput::Martingale {
            terminal: h,
            filtration: FiltrationKind::Corner,
            row_part: None,
        },
        InequalityKind::Stein => RatioInput::Sequence {
            items: SequenceInput::AdjointColumns(h),
            filtration: FiltrationKind::Corner,
        },
        InequalityKind::DoobDual => {
            let half = match p.finite() {
                None => Exponent::INFINITY,
                Some(v) => Exponent::new(v / 2.0).map_err(|_| {
                    Error::domain(format!("DOOB_DUAL witness evaluates at p/2; p = {p} < 2"))
                })?,
            };
            return Ok((
                RatioInput::Sequence {
                    items: SequenceInput::ColumnOuters(h),
                    filtration: FiltrationKind::Corner,
                },
                half,
            ));
        }
        InequalityKind::HmaxGap => {
            let weights = SequenceInput::ColumnOuters(h);
            let spec = FiltrationSpec::augmented(n)?;
            let mut s = ComplexMatrix::zeros(n, n);
            for (k, b) in weights.items().enumerate() {
                s += &spec.expectation(&b, k + 1)?;
            }
            let v = eigh(&s)?.top_vector();
            RatioInput::HmaxGap {
                x: super::ratio::outer(&v),
                weights,
            }
        }
        other => {
            return Err(Error::input(format!(
                "no explicit Hilbert witness for {other}"
            )))
        }
    };
    Ok((input, p))
}

/// Evaluates the explicit Hilbert witness; the estimate's `p` is the
/// exponent the ratio was evaluated at (`p / 2` for `DOOB_DUAL`).
pub fn hilbert_witness(kind: InequalityKind, n: usize, p: Exponent) -> Result<ConstantEstimate> {
    let (input, at) = hilbert_input(kind, n, p)?;
    let lower_bound = ratio(kind, &input, at)?;
    Ok(ConstantEstimate {
        kind: EstimateKind::Inequality(kind),
        n,
        p: at,
        lower_bound,
        witness: Witness::Ratio(input),
        iterations: 0,
        seed: 0,
        converged: true,
        rel_gap: 0.0,
    })
}
