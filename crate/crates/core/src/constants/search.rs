use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ratio::{column_matrix, ratio, RatioInput, SequenceInput};
use super::witness::hilbert_input;
use super::{ConstantEstimate, EstimateKind, InequalityKind, Witness};
use crate::error::{Error, Result};
use crate::filtration::{FiltrationKind, SignVector};
use crate::matcore::{eigh, ComplexMatrix, Exponent};
use crate::par::{map_indices, Execution};
use crate::solver::{gaussian_matrix, split_seed, SolverOptions};

/// Search state: the free parameters behind a [`RatioInput`]. Positive
/// items are stored through factors `f` with `item = f f*`.
#[derive(Debug, Clone)]
enum Params {
    Martingale {
        x: ComplexMatrix,
        z: Option<ComplexMatrix>,
        filtration: FiltrationKind,
    },
    Transform {
        x: ComplexMatrix,
        signs: SignVector,
        filtration: FiltrationKind,
    },
    Sequence {
        items: Vec<ComplexMatrix>,
        filtration: FiltrationKind,
    },
    Factored {
        factors: Vec<ComplexMatrix>,
        filtration: FiltrationKind,
    },
    Hmax {
        g: ComplexMatrix,
        factors: Vec<ComplexMatrix>,
    },
}

fn psd_factor(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eigh(&a.hermitian_part())?.apply(|l| l.max(0.0).sqrt()))
}

fn factors_of(items: &SequenceInput) -> Result<Vec<ComplexMatrix>> {
    match items {
        SequenceInput::ColumnOuters(a) => Ok((0..a.cols()).map(|k| column_matrix(a, k)).collect()),
        other => other.items().map(|x| psd_factor(&x)).collect(),
    }
}

impl Params {
    fn from_input(kind: InequalityKind, input: &RatioInput) -> Result<Params> {
        Ok(match input {
            RatioInput::Martingale {
                terminal,
                filtration,
                row_part,
            } => Params::Martingale {
                x: terminal.clone(),
                z: row_part.clone(),
                filtration: *filtration,
            },
            RatioInput::Transform {
                terminal,
                filtration,
                signs,
            } => Params::Transform {
                x: terminal.clone(),
                signs: signs.clone(),
                filtration: *filtration,
            },
            RatioInput::Sequence { items, filtration } if kind == InequalityKind::DoobDual => {
                Params::Factored {
                    factors: factors_of(items)?,
                    filtration: *filtration,
                }
            }
            RatioInput::Sequence { items, filtration } => Params::Sequence {
                items: items.to_dense(),
                filtration: *filtration,
            },
            RatioInput::HmaxGap { x, weights } => Params::Hmax {
                g: psd_factor(x)?,
                factors: factors_of(weights)?,
            },
        })
    }

    fn random<R: Rng>(kind: InequalityKind, n: usize, p: Exponent, rng: &mut R) -> Params {
        let filtration = FiltrationKind::Augmented;
        let g = |rng: &mut R| gaussian_matrix(rng, n, n);
        match kind {
            InequalityKind::BgLower | InequalityKind::BgUpper => {
                let x = g(rng);
                let z = (kind == InequalityKind::BgUpper && !p.at_least_two())
                    .then(|| x.scale_real(0.5));
                Params::Martingale { x, z, filtration }
            }
            InequalityKind::Transform | InequalityKind::TransformWeak => Params::Transform {
                x: g(rng),
                signs: SignVector::from_mask(n, rng.random()),
                filtration,
            },
            InequalityKind::Stein => Params::Sequence {
                items: (0..n).map(|_| g(rng)).collect(),
                filtration,
            },
            InequalityKind::DoobDual => Params::Factored {
                factors: (0..n).map(|_| g(rng)).collect(),
                filtration,
            },
            InequalityKind::HmaxGap => Params::Hmax {
                g: g(rng),
                factors: (0..n).map(|_| g(rng)).collect(),
            },
        }
    }

    fn input(&self) -> RatioInput {
        match self {
            Params::Martingale { x, z, filtration } => RatioInput::Martingale {
                terminal: x.clone(),
                filtration: *filtration,
                row_part: z.clone(),
            },
            Params::Transform {
                x,
                signs,
                filtration,
            } => RatioInput::Transform {
                terminal: x.clone(),
                filtration: *filtration,
                signs: signs.clone(),
            },
            Params::Sequence { items, filtration } => RatioInput::Sequence {
                items: SequenceInput::Dense(items.clone()),
                filtration: *filtration,
            },
            Params::Factored {
                factors,
                filtration,
            } => RatioInput::Sequence {
                items: SequenceInput::Dense(factors.iter().map(ComplexMatrix::cogram).collect()),
                filtration: *filtration,
            },
            Params::Hmax { g, factors } => RatioInput::HmaxGap {
                x: g.cogram(),
                weights: SequenceInput::Dense(factors.iter().map(ComplexMatrix::cogram).collect()),
            },
        }
    }

    fn matrices_mut(&mut self) -> Vec<&mut ComplexMatrix> {
        match self {
            Params::Martingale { x, z, .. } => std::iter::once(x).chain(z.as_mut()).collect(),
            Params::Transform { x, .. } => vec![x],
            Params::Sequence { items, .. } => items.iter_mut().collect(),
            Params::Factored { factors, .. } => factors.iter_mut().collect(),
            Params::Hmax { g, factors } => std::iter::once(g).chain(factors.iter_mut()).collect(),
        }
    }

    /// Adds `sigma * rms * G` to every parameter matrix, `rms` being the
    /// root-mean-square entry size of the largest one.
    fn perturbed<R: Rng>(&self, sigma: f64, rng: &mut R) -> Params {
        let mut next = self.clone();
        let mats = next.matrices_mut();
        let rms = mats
            .iter()
            .map(|m| m.frobenius_norm() / ((m.rows() * m.cols()) as f64).sqrt())
            .fold(0.0, f64::max);
        let rms = if rms > 0.0 { rms } else { 1.0 };
        for m in mats {
            let g = gaussian_matrix(rng, m.rows(), m.cols());
            m.axpy(sigma * rms, &g);
        }
        next
    }
}

fn evaluate(kind: InequalityKind, params: &Params, p: Exponent) -> Result<f64> {
    ratio(kind, &params.input(), p)
}

/// Best signs for the current terminal: all `2^(n-1)` patterns with
/// `eps_1 = +1` for `n <= 16`, greedy single flips beyond.
fn optimise_signs(
    kind: InequalityKind,
    params: &mut Params,
    p: Exponent,
    best: &mut f64,
) -> Result<()> {
    let Params::Transform { signs, .. } = params else {
        return Ok(());
    };
    let n = signs.len();
    let mut current = params.clone();
    if n <= 16 {
        for mask in 0..(1u64 << n.saturating_sub(1)) {
            if let Params::Transform { signs, .. } = &mut current {
                *signs = SignVector::from_mask(n, mask << 1);
            }
            if let Ok(v) = evaluate(kind, &current, p) {
                if v > *best {
                    *best = v;
                    *params = current.clone();
                }
            }
        }
        return Ok(());
    }
    loop {
        let mut improved = false;
        for k in 0..n {
            let mut cand = params.clone();
            if let Params::Transform { signs, .. } = &mut cand {
                signs.flip(k);
            }
            if let Ok(v) = evaluate(kind, &cand, p) {
                if v > *best {
                    *best = v;
                    *params = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            return Ok(());
        }
    }
}

struct Climb {
    params: Params,
    value: f64,
    iterations: usize,
    converged: bool,
    rel_gap: f64,
}

/// Stochastic hill climbing with the 1/5 success rule on the step size.
fn climb<R: Rng>(
    kind: InequalityKind,
    start: Params,
    p: Exponent,
    opts: &SolverOptions,
    rng: &mut R,
) -> Result<Climb> {
    let mut params = start;
    let mut value = evaluate(kind, &params, p)?;
    optimise_signs(kind, &mut params, p, &mut value)?;
    let mut sigma = 0.3;
    let mut iterations = 0;
    let mut converged = false;
    let late = opts.max_iterations - opts.max_iterations / 10;
    let mut value_late = value;
    while iterations < opts.max_iterations {
        if iterations == late {
            value_late = value;
        }
        iterations += 1;
        let cand = params.perturbed(sigma, rng);
        match evaluate(kind, &cand, p) {
            Ok(v) if v > value => {
                value = v;
                params = cand;
                sigma = (sigma * 1.5).min(2.0);
            }
            _ => sigma *= 1.5f64.powf(-0.25),
        }
        if sigma < 1e-6 {
            converged = true;
            break;
        }
    }
    optimise_signs(kind, &mut params, p, &mut value)?;
    Ok(Climb {
        params,
        value,
        iterations,
        converged,
        rel_gap: if converged {
            0.0
        } else {
            (value - value_late) / value.abs().max(f64::MIN_POSITIVE)
        },
    })
}

/// Best ratio over random restarts and local ascent, started also from the
/// explicit Hilbert witness when `kind` has one.
pub fn adversarial_search(
    kind: InequalityKind,
    n: usize,
    p: Exponent,
    opts: &SolverOptions,
) -> Result<ConstantEstimate> {
    adversarial_search_seeded(kind, n, p, opts, &[], Execution::default())
}

/// As [`adversarial_search`], with extra starting inputs. Smaller inputs are
/// embedded, so passing the witness found at a smaller `n` makes bounds
/// nondecreasing along a chain of sizes.
pub fn adversarial_search_seeded(
    kind: InequalityKind,
    n: usize,
    p: Exponent,
    opts: &SolverOptions,
    seeds: &[RatioInput],
    exec: Execution,
) -> Result<ConstantEstimate> {
    if n == 0 {
        return Err(Error::input("search needs n >= 1"));
    }
    let mut starts: Vec<Params> = Vec::new();
    if kind.has_hilbert_witness() && n >= 2 {
        if let Ok((input, _)) = hilbert_input(kind, n, p) {
            starts.push(Params::from_input(kind, &input)?);
        }
    }
    for s in seeds {
        let m = s.size()?;
        if m <= n {
            starts.push(Params::from_input(kind, &s.embed(n))?);
        }
    }
    let fixed = starts.len();
    let total = fixed + opts.restarts.max(usize::from(fixed == 0));
    let runs = map_indices(exec, total, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(opts.seed, r as u64));
        let start = if r < fixed {
            starts[r].clone()
        } else {
            Params::random(kind, n, p, &mut rng)
        };
        climb(kind, start, p, opts, &mut rng)
    });

    let mut best: Option<Climb> = None;
    let mut iterations = 0;
    let mut converged = true;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(c) => {
                iterations += c.iterations;
                converged &= c.converged;
                if best.as_ref().is_none_or(|b| c.value > b.value) {
                    best = Some(c);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let best = match (best, first_err) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start"),
    };
    let input = best.params.input();
    let lower_bound = ratio(kind, &input, p)?;
    Ok(ConstantEstimate {
        kind: EstimateKind::Inequality(kind),
        n,
        p,
        lower_bound,
        witness: Witness::Ratio(input),
        iterations,
        seed: opts.seed,
        converged,
        rel_gap: best.rel_gap.max(0.0),
    })
}
