use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::matrix::c64;

/// The two fields the kernels run over. Real input takes the `f64` path,
/// which is about four times cheaper than the complex one.
pub(crate) trait Scalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    /// `z / |z|`, or one at zero.
    fn phase(self) -> Self;
    fn abs(self) -> f64 {
        self.abs2().sqrt()
    }
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;

    #[inline]
    fn conj(self) -> f64 {
        self
    }

    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }

    #[inline]
    fn scale(self, s: f64) -> f64 {
        self * s
    }

    #[inline]
    fn phase(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for c64 {
    const ZERO: c64 = c64::new(0.0, 0.0);

    #[inline]
    fn conj(self) -> c64 {
        c64::conj(&self)
    }

    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }

    #[inline]
    fn scale(self, s: f64) -> c64 {
        self * s
    }

    #[inline]
    fn phase(self) -> c64 {
        let r = self.norm();
        if r == 0.0 {
            c64::new(1.0, 0.0)
        } else {
            self / r
        }
    }

    #[inline]
    fn abs(self) -> f64 {
        self.norm()
    }
}
