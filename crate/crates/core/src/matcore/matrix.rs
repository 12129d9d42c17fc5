use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = Complex64;

pub(crate) const ZERO: c64 = c64::new(0.0, 0.0);
pub(crate) const ONE: c64 = c64::new(1.0, 0.0);

/// Dense complex matrix in row-major order: `data[i * cols + j] = a_{ij}`.
///
/// Indices in this type are 0-based. The filtration API speaks 1-based
/// levels `k = 1..=n` and converts at its boundary.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<c64>,
}

/// Serialized form: shape plus interleaved `[re, im, re, im, ...]` entries.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.entries.len() != 2 * raw.rows * raw.cols {
            return Err(Error::input(format!(
                "expected {} interleaved reals for a {}x{} matrix, got {}",
                2 * raw.rows * raw.cols,
                raw.rows,
                raw.cols,
                raw.entries.len()
            )));
        }
        let data = raw
            .entries
            .chunks_exact(2)
            .map(|c| c64::new(c[0], c[1]))
            .collect();
        ComplexMatrix::new(raw.rows, raw.cols, data)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        let entries = m.data.iter().flat_map(|z| [z.re, z.im]).collect();
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            entries,
        }
    }
}

impl ComplexMatrix {
    /// Validating constructor: positive shape, matching length, finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<c64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::input(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| c64::new(x, 0.0)).collect())
    }

    /// Builds from a closure over 0-based `(i, j)`. Panics on a zero shape.
    pub fn from_fn<F: FnMut(usize, usize) -> c64>(rows: usize, cols: usize, mut f: F) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diag(values: &[c64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Matrix unit `e_{ij}` of size `n`, 0-based.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[c64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [c64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[c64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<c64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::shape(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Product `self * other`. Panics on incompatible shapes; see
    /// [`ComplexMatrix::checked_mul`].
    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, other.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; m * n];
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[l * n..(l + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: m,
            cols: n,
            data: out,
        }
    }

    pub fn checked_mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.matmul(other))
    }

    /// `self* self`.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..self.rows {
            add_outer_conj_left(&mut out, self.row(i));
        }
        out
    }

    /// `self self*`.
    pub fn cogram(&self) -> ComplexMatrix {
        let m = self.rows;
        let mut out = ComplexMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let s: c64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        out
    }

    pub fn scale(&self, s: c64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Real Hilbert-Schmidt inner product `Re Tr(self* other)`.
    pub fn real_inner(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// `(a + a*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn diagonal(&self) -> Vec<c64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    /// Zero-pads a square matrix into the top-left corner of an `n x n` one.
    pub fn embed(&self, n: usize) -> Self {
        assert!(n >= self.rows && n >= self.cols);
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..self.rows {
            out.data[i * n..i * n + self.cols].copy_from_slice(self.row(i));
        }
        out
    }

    pub fn map<F: Fn(c64) -> c64>(&self, f: F) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn axpy(&mut self, alpha: f64, x: &ComplexMatrix) {
        assert_eq!(self.shape(), x.shape());
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a += b * alpha;
        }
    }
}

/// `out += v* v` for a row vector `v` (i.e. `out_{ij} += conj(v_i) v_j`),
/// skipping zero entries so sparse rows cost `nnz^2`.
pub(crate) fn add_outer_conj_left(out: &mut ComplexMatrix, v: &[c64]) {
    let nz: Vec<(usize, c64)> = v
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, z)| *z != ZERO)
        .collect();
    for &(i, vi) in &nz {
        let vic = vi.conj();
        for &(j, vj) in &nz {
            out[(i, j)] += vic * vj;
        }
    }
}

/// `out += v v*` for a column vector `v` (i.e. `out_{ij} += v_i conj(v_j)`).
pub(crate) fn add_outer(out: &mut ComplexMatrix, v: &[c64]) {
    let nz: Vec<(usize, c64)> = v
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, z)| *z != ZERO)
        .collect();
    for &(i, vi) in &nz {
        for &(j, vj) in &nz {
            out[(i, j)] += vi * vj.conj();
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = c64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &c64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut c64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }

        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ONE, c64::new(f64::NAN, 0.0)]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            ComplexMatrix::new(0, 2, vec![]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ONE]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn gram_matches_product() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c64::new(i as f64 + 1.0, j as f64 - 0.5));
        assert!(a.gram().max_abs_diff(&(&a.adjoint() * &a)) < 1e-14);
        assert!(a.cogram().max_abs_diff(&(&a * &a.adjoint())) < 1e-14);
    }

    #[test]
    fn serde_roundtrip_is_exact() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| {
            c64::new(0.1 * i as f64, 1.0 / (j as f64 + 3.0))
        });
        let s = serde_json::to_string(&a).unwrap();
        let b: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(
            serde_json::from_str::<ComplexMatrix>(r#"{"rows":1,"cols":1,"entries":[1.0]}"#)
                .is_err()
        );
    }
}
