//! The canonical filtration of `M_n`.
//!
//! Two expectation families are provided:
//!
//! - corner: `E_k(a) = e_k a e_k`, the top-left `k x k` block;
//! - augmented: `E~_k(a) = E_k(a) + sum_{i>k} a_ii e_ii`, which is faithful
//!   (`E~_n` is the identity and every `E~_k` preserves the trace).
//!
//! Both families partition the matrix entries into levels: entry `(i, j)`
//! enters the filtration at exactly one level `k`, and the increment `d_k a`
//! is `a` restricted to level-`k` entries. Under the corner family level `k`
//! is the hook `max(i, j) = k`; under the augmented family the whole diagonal
//! sits at level 1 and level `k >= 2` is the hook minus its corner.
//!
//! Indices `k` are 1-based throughout, matching `E_1, ..., E_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FiltrationKind {
    Corner,
    Augmented,
}

/// Ambient size plus expectation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct FiltrationSpec {
    ambient_n: usize,
    kind: FiltrationKind,
}

#[derive(Deserialize)]
struct RawSpec {
    ambient_n: usize,
    kind: FiltrationKind,
}

impl TryFrom<RawSpec> for FiltrationSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        FiltrationSpec::new(raw.ambient_n, raw.kind)
    }
}

impl FiltrationSpec {
    pub fn new(ambient_n: usize, kind: FiltrationKind) -> Result<Self> {
        if ambient_n == 0 {
            return Err(Error::input("filtration needs ambient_n >= 1"));
        }
        Ok(FiltrationSpec { ambient_n, kind })
    }

    pub fn corner(ambient_n: usize) -> Result<Self> {
        Self::new(ambient_n, FiltrationKind::Corner)
    }

    pub fn augmented(ambient_n: usize) -> Result<Self> {
        Self::new(ambient_n, FiltrationKind::Augmented)
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn kind(&self) -> FiltrationKind {
        self.kind
    }

    /// Level (1-based) at which the 0-based entry `(i, j)` enters.
    #[inline]
    pub fn level(&self, i: usize, j: usize) -> usize {
        match self.kind {
            FiltrationKind::Augmented if i == j => 1,
            _ => i.max(j) + 1,
        }
    }

    fn check_matrix(&self, a: &ComplexMatrix) -> Result<()> {
        let n = self.ambient_n;
        if a.shape() != (n, n) {
            return Err(Error::shape(format!(
                "matrix is {}x{}, filtration is on {n}x{n}",
                a.rows(),
                a.cols()
            )));
        }
        Ok(())
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.ambient_n {
            return Err(Error::Index {
                index: k,
                bound: self.ambient_n,
            });
        }
        Ok(())
    }

    fn restrict<F: Fn(usize) -> bool>(&self, a: &ComplexMatrix, keep: F) -> ComplexMatrix {
        let n = self.ambient_n;
        ComplexMatrix::from_fn(n, n, |i, j| {
            if keep(self.level(i, j)) {
                a[(i, j)]
            } else {
                ZERO
            }
        })
    }

    /// `E_k(a)` or `E~_k(a)`, `1 <= k <= n`.
    pub fn expectation(&self, a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
        self.check_matrix(a)?;
        self.check_index(k)?;
        Ok(self.restrict(a, |l| l <= k))
    }

    /// `d_k a = E_k a - E_{k-1} a` (with `E_0 = 0`).
    pub fn increment(&self, a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
        self.check_matrix(a)?;
        self.check_index(k)?;
        Ok(self.restrict(a, |l| l == k))
    }

    /// Whether every entry of `x` outside level `k` is at most `tol` in modulus.
    pub fn is_adapted_increment(&self, x: &ComplexMatrix, k: usize, tol: f64) -> bool {
        let n = self.ambient_n;
        x.shape() == (n, n)
            && (0..n).all(|i| (0..n).all(|j| self.level(i, j) == k || x[(i, j)].norm() <= tol))
    }
}

fn square_spec(a: &ComplexMatrix, kind: FiltrationKind) -> Result<FiltrationSpec> {
    FiltrationSpec::new(a.require_square("expectation")?, kind)
}

/// `E_k(a) = e_k a e_k`: keeps the top-left `k x k` block.
pub fn corner_expectation(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    square_spec(a, FiltrationKind::Corner)?.expectation(a, k)
}

/// `E_k(a)` plus the diagonal entries `a_ii`, `i > k`, kept in place.
pub fn augmented_expectation(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    square_spec(a, FiltrationKind::Augmented)?.expectation(a, k)
}

/// A finite martingale stored as its increment list `(d_1 x, ..., d_n x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMartingale")]
pub struct MartingaleSeq {
    spec: FiltrationSpec,
    increments: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct RawMartingale {
    spec: FiltrationSpec,
    increments: Vec<ComplexMatrix>,
}

impl TryFrom<RawMartingale> for MartingaleSeq {
    type Error = Error;

    fn try_from(raw: RawMartingale) -> Result<Self> {
        MartingaleSeq::new(raw.spec, raw.increments)
    }
}

impl MartingaleSeq {
    /// Validates length, shapes and adaptedness (entries outside the level of
    /// each increment must vanish to `1e-10` relative).
    pub fn new(spec: FiltrationSpec, increments: Vec<ComplexMatrix>) -> Result<Self> {
        let n = spec.ambient_n();
        if increments.len() != n {
            return Err(Error::shape(format!(
                "{} increments for a filtration of length {n}",
                increments.len()
            )));
        }
        let scale = increments
            .iter()
            .map(ComplexMatrix::max_abs)
            .fold(0.0, f64::max);
        for (k, d) in increments.iter().enumerate() {
            spec.check_matrix(d)?;
            if !spec.is_adapted_increment(d, k + 1, 1e-10 * scale.max(1.0)) {
                return Err(Error::input(format!(
                    "increment {} is not adapted to level {}",
                    k + 1,
                    k + 1
                )));
            }
        }
        Ok(MartingaleSeq { spec, increments })
    }

    pub fn spec(&self) -> FiltrationSpec {
        self.spec
    }

    pub fn increments(&self) -> &[ComplexMatrix] {
        &self.increments
    }

    pub fn into_increments(self) -> Vec<ComplexMatrix> {
        self.increments
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// `x_k = sum_{j <= k} d_j x` (1-based; `k = 0` gives zero).
    pub fn partial_sum(&self, k: usize) -> ComplexMatrix {
        let n = self.spec.ambient_n();
        self.increments
            .iter()
            .take(k)
            .fold(ComplexMatrix::zeros(n, n), |acc, d| acc + d.clone())
    }

    /// The terminal matrix `x_n`.
    pub fn terminal(&self) -> ComplexMatrix {
        self.partial_sum(self.len())
    }

    /// Increment-wise multiplication by a positive or negative scalar.
    pub fn scaled(&self, c: f64) -> MartingaleSeq {
        MartingaleSeq {
            spec: self.spec,
            increments: self.increments.iter().map(|d| d.scale_real(c)).collect(),
        }
    }

    /// The martingale with increments `eps_k d_k x`.
    pub fn signed(&self, eps: &SignVector) -> Result<MartingaleSeq> {
        check_signs(self, eps)?;
        Ok(MartingaleSeq {
            spec: self.spec,
            increments: self
                .increments
                .iter()
                .zip(eps.iter())
                .map(|(d, s)| d.scale_real(s))
                .collect(),
        })
    }
}

/// The increments of the martingale `x_k = E_k(a)` under `spec`.
pub fn increments(a: &ComplexMatrix, spec: FiltrationSpec) -> Result<MartingaleSeq> {
    spec.check_matrix(a)?;
    let n = spec.ambient_n();
    let mut out = vec![ComplexMatrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            if z != ZERO {
                out[spec.level(i, j) - 1][(i, j)] = z;
            }
        }
    }
    Ok(MartingaleSeq {
        spec,
        increments: out,
    })
}

/// A choice of signs `eps_k = +-1`, one per filtration level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;

    fn try_from(signs: Vec<i8>) -> Result<Self> {
        SignVector::new(signs)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(s: SignVector) -> Self {
        s.0
    }
}

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|s| !matches!(s, 1 | -1)) {
            return Err(Error::input(format!("sign {bad} is not +-1")));
        }
        Ok(SignVector(signs))
    }

    pub fn all_plus(n: usize) -> Self {
        SignVector(vec![1; n])
    }

    /// `+1, -1, +1, ...`
    pub fn alternating(n: usize) -> Self {
        SignVector((0..n).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect())
    }

    /// Bit `k` of `mask` set means `eps_{k+1} = -1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        SignVector(
            (0..n)
                .map(|k| if k < 64 && mask >> k & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// Signs as `f64`.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|&s| f64::from(s))
    }

    /// Flips the sign at 0-based position `k`.
    pub fn flip(&mut self, k: usize) {
        self.0[k] = -self.0[k];
    }
}

fn check_signs(m: &MartingaleSeq, eps: &SignVector) -> Result<()> {
    if eps.len() != m.len() {
        return Err(Error::shape(format!(
            "{} signs for {} increments",
            eps.len(),
            m.len()
        )));
    }
    Ok(())
}

/// `sum_k eps_k d_k x`.
pub fn transform(m: &MartingaleSeq, eps: &SignVector) -> Result<ComplexMatrix> {
    check_signs(m, eps)?;
    let n = m.spec.ambient_n();
    let mut out = ComplexMatrix::zeros(n, n);
    for (d, s) in m.increments.iter().zip(eps.iter()) {
        out.axpy(s, d);
    }
    Ok(out)
}

/// `sum_k eps_k d_k a` computed entrywise from the terminal matrix, without
/// materialising increments.
pub fn transform_terminal(
    a: &ComplexMatrix,
    spec: FiltrationSpec,
    eps: &SignVector,
) -> Result<ComplexMatrix> {
    spec.check_matrix(a)?;
    if eps.len() != spec.ambient_n() {
        return Err(Error::shape(format!(
            "{} signs for a filtration of length {}",
            eps.len(),
            spec.ambient_n()
        )));
    }
    let signs = eps.signs();
    let n = spec.ambient_n();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        a[(i, j)] * f64::from(signs[spec.level(i, j) - 1])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c64, min_eigenvalue, schatten_norm, sq_fn_norm, Exponent, Side};
    use crate::solver::{gaussian_matrix, gaussian_psd, rng_from_seed};
    use rand::Rng;

    fn ones(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c64::new(1.0, 0.0))
    }

    #[test]
    fn corner_examples() {
        let e = corner_expectation(&ones(3), 2).unwrap();
        let want = ComplexMatrix::from_fn(3, 3, |i, j| {
            c64::new(if i < 2 && j < 2 { 1.0 } else { 0.0 }, 0.0)
        });
        assert_eq!(e, want);

        let a = gaussian_matrix(&mut rng_from_seed(1), 4, 4);
        assert_eq!(corner_expectation(&a, 4).unwrap(), a);
        assert!(matches!(
            corner_expectation(&a, 0),
            Err(Error::Index { index: 0, bound: 4 })
        ));
        assert!(matches!(
            corner_expectation(&a, 5),
            Err(Error::Index { index: 5, bound: 4 })
        ));
    }

    #[test]
    fn corner_is_self_adjoint_for_the_trace_pairing() {
        let mut rng = rng_from_seed(2);
        let a = gaussian_matrix(&mut rng, 4, 4);
        let b = gaussian_matrix(&mut rng, 4, 4);
        // Oracle: explicit double sum for the traces.
        let tr = |x: &ComplexMatrix, y: &ComplexMatrix| -> c64 {
            (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .map(|(i, j)| x[(i, j)] * y[(j, i)])
                .sum()
        };
        let lhs = tr(&corner_expectation(&a, 2).unwrap(), &b);
        let rhs = tr(&a, &corner_expectation(&b, 2).unwrap());
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn augmented_examples() {
        let e = augmented_expectation(&ones(3), 2).unwrap();
        let mut want = corner_expectation(&ones(3), 2).unwrap();
        want[(2, 2)] = c64::new(1.0, 0.0);
        assert_eq!(e, want);

        let d = ComplexMatrix::diag_real(&[1.0, -2.0, 3.0, 0.5]);
        for k in 1..=4 {
            assert_eq!(augmented_expectation(&d, k).unwrap(), d);
        }

        let a = gaussian_matrix(&mut rng_from_seed(3), 4, 4);
        for k in 1..=4 {
            let t = augmented_expectation(&a, k).unwrap().trace();
            assert!((t - a.trace()).norm() < 1e-14);
        }
    }

    #[test]
    fn increment_examples() {
        let spec = FiltrationSpec::corner(3).unwrap();
        let e13 = ComplexMatrix::unit(3, 0, 2);
        let m = increments(&e13, spec).unwrap();
        for (k, d) in m.increments().iter().enumerate() {
            if k == 2 {
                assert_eq!(d, &e13);
            } else {
                assert!(d.is_zero());
            }
        }

        let a = gaussian_matrix(&mut rng_from_seed(4), 8, 8);
        for kind in [FiltrationKind::Corner, FiltrationKind::Augmented] {
            let m = increments(&a, FiltrationSpec::new(8, kind).unwrap()).unwrap();
            assert!(m.terminal().max_abs_diff(&a) <= 1e-12);
        }
        let bad = ComplexMatrix::zeros(3, 3);
        assert!(matches!(
            increments(&bad, FiltrationSpec::corner(4).unwrap()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn augmented_increments_relate_to_corner_ones() {
        let n = 4;
        let a = gaussian_matrix(&mut rng_from_seed(5), n, n);
        let d = increments(&a, FiltrationSpec::corner(n).unwrap()).unwrap();
        let dt = increments(&a, FiltrationSpec::augmented(n).unwrap()).unwrap();
        // d~_1 a = d_1 a + sum_{i >= 2} a_ii e_ii
        let mut want = d.increments()[0].clone();
        for i in 1..n {
            want[(i, i)] += a[(i, i)];
        }
        assert!(dt.increments()[0].max_abs_diff(&want) <= 1e-15);
        // d~_k a = d_k a - a_kk e_kk
        for k in 1..n {
            let mut want = d.increments()[k].clone();
            want[(k, k)] -= a[(k, k)];
            assert!(dt.increments()[k].max_abs_diff(&want) <= 1e-15);
        }
    }

    #[test]
    fn martingale_invariants() {
        let mut rng = rng_from_seed(6);
        for kind in [FiltrationKind::Corner, FiltrationKind::Augmented] {
            let spec = FiltrationSpec::new(6, kind).unwrap();
            let a = gaussian_matrix(&mut rng, 6, 6);
            let m = increments(&a, spec).unwrap();
            for k in 1..=6 {
                let xk = m.partial_sum(k);
                assert!(
                    spec.increment(&xk, k)
                        .unwrap()
                        .max_abs_diff(&m.increments()[k - 1])
                        <= 1e-10
                );
                for l in k..=6 {
                    assert!(
                        spec.expectation(&m.partial_sum(l), k)
                            .unwrap()
                            .max_abs_diff(&xk)
                            <= 1e-10
                    );
                }
            }
            assert!(MartingaleSeq::new(spec, m.increments().to_vec()).is_ok());
            let mut broken = m.increments().to_vec();
            broken.swap(0, 3);
            assert!(matches!(
                MartingaleSeq::new(spec, broken),
                Err(Error::Input(_))
            ));
        }
    }

    #[test]
    fn tower_law_is_exact() {
        let mut rng = rng_from_seed(7);
        let a = gaussian_matrix(&mut rng, 5, 5);
        for kind in [FiltrationKind::Corner, FiltrationKind::Augmented] {
            let spec = FiltrationSpec::new(5, kind).unwrap();
            for k in 1..=5 {
                for m in 1..=5 {
                    let lhs = spec
                        .expectation(&spec.expectation(&a, m).unwrap(), k)
                        .unwrap();
                    assert_eq!(lhs, spec.expectation(&a, k.min(m)).unwrap());
                }
            }
        }
    }

    #[test]
    fn expectations_contract_schatten_norms() {
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            let a = gaussian_matrix(&mut rng, 6, 6);
            for p in [
                Exponent::ONE,
                Exponent::TWO,
                Exponent::new(4.0).unwrap(),
                Exponent::INFINITY,
            ] {
                let na = schatten_norm(&a, p).unwrap();
                for k in 1..=6 {
                    assert!(
                        schatten_norm(&corner_expectation(&a, k).unwrap(), p).unwrap()
                            <= na * (1.0 + 1e-12)
                    );
                    assert!(
                        schatten_norm(&augmented_expectation(&a, k).unwrap(), p).unwrap()
                            <= na * (1.0 + 1e-12)
                    );
                }
            }
        }
    }

    #[test]
    fn augmented_expectation_is_positive() {
        let mut rng = rng_from_seed(9);
        for _ in 0..20 {
            let a = gaussian_psd(&mut rng, 5);
            let scale = schatten_norm(&a, Exponent::INFINITY).unwrap();
            for k in 1..=5 {
                let e = augmented_expectation(&a, k).unwrap();
                assert!(min_eigenvalue(&e).unwrap() >= -1e-10 * scale);
            }
        }
    }

    #[test]
    fn kadison_schwarz_for_corners() {
        let mut rng = rng_from_seed(10);
        for _ in 0..20 {
            let a = gaussian_matrix(&mut rng, 5, 5);
            let scale = a.gram().max_abs();
            for k in 1..=5 {
                let e = corner_expectation(&a, k).unwrap();
                let diff = corner_expectation(&a.gram(), k).unwrap() - e.gram();
                assert!(min_eigenvalue(&diff).unwrap() >= -1e-10 * scale);
            }
        }
    }

    #[test]
    fn augmented_and_corner_square_functions_are_equivalent() {
        let ps = [
            Exponent::ONE,
            Exponent::TWO,
            Exponent::new(4.0).unwrap(),
            Exponent::INFINITY,
        ];
        let mut rng = rng_from_seed(11);
        for t in 0..300 {
            let n = rng.random_range(1..=8);
            let a = gaussian_matrix(&mut rng, n, n);
            let p = ps[t % ps.len()];
            let c = sq_fn_norm(
                increments(&a, FiltrationSpec::corner(n).unwrap())
                    .unwrap()
                    .increments(),
                p,
                Side::Column,
            )
            .unwrap();
            let g = sq_fn_norm(
                increments(&a, FiltrationSpec::augmented(n).unwrap())
                    .unwrap()
                    .increments(),
                p,
                Side::Column,
            )
            .unwrap();
            assert!(g >= c / 3.0 && g <= 3.0 * c, "n={n} p={p}: {g} vs {c}");
        }
    }

    #[test]
    fn transform_examples() {
        let mut rng = rng_from_seed(12);
        let a = gaussian_matrix(&mut rng, 4, 4);
        let spec = FiltrationSpec::augmented(4).unwrap();
        let m = increments(&a, spec).unwrap();
        assert!(
            transform(&m, &SignVector::all_plus(4))
                .unwrap()
                .max_abs_diff(&a)
                <= 1e-15
        );

        let d = ComplexMatrix::diag_real(&[1.0, 2.0, 3.0, 4.0]);
        let md = increments(&d, FiltrationSpec::corner(4).unwrap()).unwrap();
        let t = transform(&md, &SignVector::alternating(4)).unwrap();
        assert_eq!(t, ComplexMatrix::diag_real(&[1.0, -2.0, 3.0, -4.0]));

        for mask in 0..16 {
            let eps = SignVector::from_mask(4, mask);
            let t = transform(&m, &eps).unwrap();
            assert!((t.frobenius_norm() - a.frobenius_norm()).abs() <= 1e-12 * a.frobenius_norm());
            assert_eq!(t, transform_terminal(&a, spec, &eps).unwrap());
        }
        assert!(matches!(
            transform(&m, &SignVector::all_plus(3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn sign_vector_validation_and_serde() {
        assert!(SignVector::new(vec![1, -1, 1]).is_ok());
        assert!(matches!(SignVector::new(vec![1, 0]), Err(Error::Input(_))));
        let s = SignVector::from_mask(5, 0b10010);
        assert_eq!(s.signs(), &[1, -1, 1, 1, -1]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[1,-1,1,1,-1]");
        assert_eq!(serde_json::from_str::<SignVector>(&json).unwrap(), s);
        assert!(serde_json::from_str::<SignVector>("[1,2]").is_err());
        assert!(
            serde_json::from_str::<FiltrationSpec>(r#"{"ambient_n":0,"kind":"CORNER"}"#).is_err()
        );
    }
}
