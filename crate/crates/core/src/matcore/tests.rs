use proptest::prelude::*;

use super::*;
use crate::solver::{gaussian_matrix, gaussian_psd, rng_from_seed};

fn hilbert(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ZERO
        } else {
            c64::new(1.0 / (j as f64 - i as f64), 0.0)
        }
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn spectrum_of_identity_and_diagonal() {
    let s = singular_values(&ComplexMatrix::identity(3)).unwrap();
    assert_eq!(s.len(), 3);
    assert!(s.values().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    let s = singular_values(&ComplexMatrix::diag_real(&[3.0, 4.0])).unwrap();
    assert!((s.values()[0] - 4.0).abs() < 1e-15);
    assert!((s.values()[1] - 3.0).abs() < 1e-15);
}

/// Oracle: a real skew-symmetric 4x4 matrix has characteristic polynomial
/// `l^4 + (sum_{i<j} h_ij^2) l^2 + Pf(h)^2`; its roots are `+-i mu` and the
/// singular values are the `mu`, each twice.
#[test]
fn hilbert_four_matches_characteristic_polynomial_roots() {
    let h = hilbert(4);
    let e = |i: usize, j: usize| h[(i - 1, j - 1)].re;
    let sum_sq: f64 = (1..=4)
        .flat_map(|i| (i + 1..=4).map(move |j| (i, j)))
        .map(|(i, j)| e(i, j).powi(2))
        .sum();
    let pf = e(1, 2) * e(3, 4) - e(1, 3) * e(2, 4) + e(1, 4) * e(2, 3);
    // mu^4 - sum_sq mu^2 + pf^2 = 0
    let disc = (sum_sq * sum_sq - 4.0 * pf * pf).sqrt();
    let big = ((sum_sq + disc) / 2.0).sqrt();
    let small = ((sum_sq - disc) / 2.0).sqrt();
    // Frozen: sqrt(13)/2 and sqrt(13)/6.
    assert!(rel_close(big, 13f64.sqrt() / 2.0, 1e-14));
    assert!(rel_close(small, 13f64.sqrt() / 6.0, 1e-14));

    let s = singular_values(&h).unwrap();
    let expected = [big, big, small, small];
    for (got, want) in s.values().iter().zip(expected) {
        assert!(rel_close(*got, want, 1e-10), "{got} vs {want}");
    }
    let j = svd(&h).unwrap();
    for (got, want) in j.s.iter().zip(expected) {
        assert!(rel_close(*got, want, 1e-10), "{got} vs {want}");
    }
}

#[test]
fn bidiagonal_route_agrees_with_jacobi() {
    let mut rng = rng_from_seed(11);
    for (m, n) in [(30, 30), (20, 7), (7, 20), (1, 5), (64, 64)] {
        let a = gaussian_matrix(&mut rng, m, n);
        let fast = singular_values(&a).unwrap();
        let jac = svd(&a).unwrap();
        for (x, y) in fast.values().iter().zip(&jac.s) {
            assert!(rel_close(*x, *y, 1e-10), "{m}x{n}: {x} vs {y}");
        }
    }
}

#[test]
fn parallel_and_sequential_bisection_agree() {
    let a = gaussian_matrix(&mut rng_from_seed(3), 40, 40);
    let s1 = singular_values_with(&a, Execution::Sequential).unwrap();
    let s2 = singular_values_with(&a, Execution::Parallel).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn non_finite_is_input_error() {
    let mut a = ComplexMatrix::identity(2);
    a.as_mut_slice()[1] = c64::new(f64::INFINITY, 0.0);
    assert!(matches!(singular_values(&a), Err(Error::Input(_))));
    assert!(matches!(svd(&a), Err(Error::Input(_))));
}

#[test]
fn modulus_examples() {
    let m = modulus(&ComplexMatrix::diag_real(&[-2.0, 5.0])).unwrap();
    assert!(m.max_abs_diff(&ComplexMatrix::diag_real(&[2.0, 5.0])) < 1e-14);

    // A unitary: rotation times a phase.
    let (c, s) = (0.6, 0.8);
    let u = ComplexMatrix::new(
        2,
        2,
        vec![
            c64::new(c, 0.0),
            c64::new(0.0, -s),
            c64::new(0.0, -s),
            c64::new(c, 0.0),
        ],
    )
    .unwrap();
    assert!(
        modulus(&u)
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(2))
            < 1e-13
    );

    let a = gaussian_matrix(&mut rng_from_seed(5), 3, 3);
    let m = modulus(&a).unwrap();
    // Oracle: direct multiplication.
    assert!((&m * &m).max_abs_diff(&a.gram()) < 1e-9);
    assert!(m.is_hermitian(1e-10));

    let wide = ComplexMatrix::zeros(2, 3);
    assert!(matches!(modulus(&wide), Err(Error::Shape(_))));
}

#[test]
fn schatten_examples() {
    assert!(
        (schatten_norm(&ComplexMatrix::identity(3), Exponent::ONE).unwrap() - 3.0).abs() < 1e-14
    );
    assert!(
        (schatten_norm(&ComplexMatrix::diag_real(&[3.0, 4.0]), Exponent::TWO).unwrap() - 5.0).abs()
            < 1e-14
    );
    let h = hilbert(64);
    let top = schatten_norm(&h, Exponent::INFINITY).unwrap();
    let jac = svd(&h).unwrap().s[0];
    assert!(rel_close(top, jac, 1e-10));
    assert!(top <= 3.2, "{top}");
    assert_eq!(
        schatten_norm(&ComplexMatrix::zeros(3, 3), Exponent::new(1.5).unwrap()).unwrap(),
        0.0
    );
}

#[test]
fn weak_l1_examples() {
    let d = ComplexMatrix::diag_real(&[1.0, 0.5, 1.0 / 3.0]);
    assert!((weak_l1_norm(&d).unwrap() - 1.0).abs() < 1e-14);

    let u = [c64::new(0.6, 0.0), c64::new(0.0, 0.8)];
    let v = [c64::new(1.0, 0.0), c64::new(0.0, 0.0)];
    let rank_one = ComplexMatrix::from_fn(2, 2, |i, j| u[i] * v[j].conj() * 2.5);
    assert!((weak_l1_norm(&rank_one).unwrap() - 2.5).abs() < 1e-14);

    let a = gaussian_matrix(&mut rng_from_seed(8), 8, 8);
    assert!(weak_l1_norm(&a).unwrap() < schatten_norm(&a, Exponent::ONE).unwrap());
}

#[test]
fn square_function_examples() {
    let mut rng = rng_from_seed(21);
    let a = gaussian_matrix(&mut rng, 4, 4);
    for p in [
        Exponent::ONE,
        Exponent::new(1.5).unwrap(),
        Exponent::TWO,
        Exponent::INFINITY,
    ] {
        for side in [Side::Column, Side::Row] {
            let v = sq_fn_norm(std::slice::from_ref(&a), p, side).unwrap();
            assert!(rel_close(v, schatten_norm(&a, p).unwrap(), 1e-10));
        }
    }

    // Row parts of the Hilbert matrix: row k restricted to columns < k.
    let n = 16;
    let h = hilbert(n);
    let rows: Vec<ComplexMatrix> = (0..n)
        .map(|k| {
            ComplexMatrix::from_fn(n, n, |i, j| if i == k && j < k { h[(i, j)] } else { ZERO })
        })
        .collect();
    let got = sq_fn_norm(&rows, Exponent::INFINITY, Side::Row).unwrap();
    let want = (1..n).map(|j| 1.0 / (j * j) as f64).sum::<f64>().sqrt();
    assert!((got - want).abs() < 1e-12);

    let x1 = gaussian_matrix(&mut rng, 4, 4);
    let x2 = gaussian_matrix(&mut rng, 4, 4);
    let got = sq_fn_norm(&[x1.clone(), x2.clone()], Exponent::TWO, Side::Column).unwrap();
    let want = (x1.frobenius_norm().powi(2) + x2.frobenius_norm().powi(2)).sqrt();
    assert!(rel_close(got, want, 1e-12));

    assert!(matches!(
        sq_fn_norm(
            &[x1, ComplexMatrix::zeros(3, 3)],
            Exponent::TWO,
            Side::Column
        ),
        Err(Error::Shape(_))
    ));
}

#[test]
fn smoothed_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(99);
    let a = gaussian_matrix(&mut rng, 4, 4);
    let dir = gaussian_matrix(&mut rng, 4, 4);
    for p in [
        Exponent::ONE,
        Exponent::new(1.5).unwrap(),
        Exponent::new(4.0).unwrap(),
        Exponent::INFINITY,
    ] {
        let eps = 0.05;
        let (_, g) = smoothed_norm_grad(&a, p, eps).unwrap();
        let h = 1e-6;
        let mut plus = a.clone();
        plus.axpy(h, &dir);
        let mut minus = a.clone();
        minus.axpy(-h, &dir);
        let fd = (smoothed_norm_grad(&plus, p, eps).unwrap().0
            - smoothed_norm_grad(&minus, p, eps).unwrap().0)
            / (2.0 * h);
        let an = g.real_inner(&dir);
        assert!(
            (fd - an).abs() < 1e-6 * (1.0 + fd.abs()),
            "{p:?}: {fd} vs {an}"
        );
    }
}

fn exponents() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::new(1.5).unwrap()),
        Just(Exponent::TWO),
        Just(Exponent::new(4.0).unwrap()),
        Just(Exponent::INFINITY),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schatten_is_a_norm(seed in any::<u64>(), n in 1usize..7, p in exponents(), c in -3.0f64..3.0) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, n, n);
        let b = gaussian_matrix(&mut rng, n, n);
        let na = schatten_norm(&a, p).unwrap();
        let nb = schatten_norm(&b, p).unwrap();
        let nab = schatten_norm(&(&a + &b), p).unwrap();
        prop_assert!(nab <= na + nb + 1e-9);
        let nca = schatten_norm(&a.scale_real(c), p).unwrap();
        prop_assert!((nca - c.abs() * na).abs() <= 1e-9 * (1.0 + na));
    }

    #[test]
    fn holder_inequality(seed in any::<u64>(), n in 1usize..7, p in exponents()) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, n, n);
        let b = gaussian_matrix(&mut rng, n, n);
        let lhs = (&a * &b).trace().norm();
        let rhs = schatten_norm(&a, p).unwrap() * schatten_norm(&b, p.conjugate()).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn weak_l1_is_a_quasi_norm(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, n, n);
        let b = gaussian_matrix(&mut rng, n, n);
        let wa = weak_l1_norm(&a).unwrap();
        let wb = weak_l1_norm(&b).unwrap();
        prop_assert!(wa <= schatten_norm(&a, Exponent::ONE).unwrap() * (1.0 + 1e-12));
        prop_assert!(weak_l1_norm(&(&a + &b)).unwrap() <= 2.0 * (wa + wb));
    }

    #[test]
    fn square_functions_agree_at_two(seed in any::<u64>(), n in 1usize..6, len in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let xs: Vec<ComplexMatrix> = (0..len).map(|_| gaussian_matrix(&mut rng, n, n)).collect();
        let c = sq_fn_norm(&xs, Exponent::TWO, Side::Column).unwrap();
        let r = sq_fn_norm(&xs, Exponent::TWO, Side::Row).unwrap();
        prop_assert!((c - r).abs() <= 1e-12 * (1.0 + c));
    }

    #[test]
    fn modulus_is_psd(seed in any::<u64>(), n in 1usize..7) {
        let a = gaussian_matrix(&mut rng_from_seed(seed), n, n);
        let m = modulus(&a).unwrap();
        let scale = schatten_norm(&a, Exponent::INFINITY).unwrap();
        prop_assert!(min_eigenvalue(&m).unwrap() >= -1e-10 * scale);
    }

    #[test]
    fn psd_norm_matches_eigenvalues(seed in any::<u64>(), n in 1usize..6) {
        let s = gaussian_psd(&mut rng_from_seed(seed), n);
        let e = eigh(&s).unwrap();
        for q in [0.5, 0.75, 1.0, 2.0] {
            let want = spectrum_quasi_norm(&e.values.iter().map(|v| v.max(0.0)).collect::<Vec<_>>(), q);
            let got = psd_quasi_norm(&s, q).unwrap();
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want));
        }
    }
}
