use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Schatten exponent `p` with `1 <= p < inf`, or the operator-norm symbol.
///
/// Infinity is a distinct variant, never a large float.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Exponent(Repr);

#[derive(Clone, Copy, PartialEq, Debug)]
enum Repr {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent(Repr::Infinity);
    pub const ONE: Exponent = Exponent(Repr::Finite(1.0));
    pub const TWO: Exponent = Exponent(Repr::Finite(2.0));

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::domain(format!(
                "Schatten exponent must be >= 1, got {p}"
            )));
        }
        if p.is_infinite() {
            return Ok(Self::INFINITY);
        }
        Ok(Exponent(Repr::Finite(p)))
    }

    /// The finite value, or `None` for infinity.
    pub fn finite(self) -> Option<f64> {
        match self.0 {
            Repr::Finite(p) => Some(p),
            Repr::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self.0 == Repr::Infinity
    }

    /// `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        match self.0 {
            Repr::Infinity => Self::ONE,
            Repr::Finite(1.0) => Self::INFINITY,
            Repr::Finite(p) => Exponent(Repr::Finite(p / (p - 1.0))),
        }
    }

    /// `p >= 2` (infinity included).
    pub fn at_least_two(self) -> bool {
        self.finite().is_none_or(|p| p >= 2.0)
    }

    /// Half of the exponent as a raw quasi-norm index, `inf` for infinity.
    pub(crate) fn half(self) -> f64 {
        self.finite().map_or(f64::INFINITY, |p| p / 2.0)
    }

    pub(crate) fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={self}")
    }
}

/// `inf` or the shortest round-tripping decimal.
impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Infinity => f.write_str("inf"),
            Repr::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// Accepts `inf`/`infinity`, decimals, and fractions such as `4/3`.
impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" || t == "∞" {
            return Ok(Self::INFINITY);
        }
        let value = if let Some((num, den)) = t.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad exponent {s:?}")))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad exponent {s:?}")))?;
            num / den
        } else {
            t.parse()
                .map_err(|_| Error::input(format!("bad exponent {s:?}")))?
        };
        Exponent::new(value)
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Exponent> for String {
    fn from(p: Exponent) -> String {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::ONE.conjugate(), Exponent::INFINITY);
        assert_eq!(Exponent::INFINITY.conjugate(), Exponent::ONE);
        assert_eq!(Exponent::TWO.conjugate(), Exponent::TWO);
        let p = Exponent::new(4.0).unwrap().conjugate().finite().unwrap();
        assert!((p - 4.0 / 3.0).abs() < 1e-15);
        for p in [1.25, 1.5, 3.0, 7.0] {
            let q = Exponent::new(p).unwrap().conjugate().finite().unwrap();
            assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_below_one() {
        assert!(matches!(Exponent::new(0.5), Err(Error::Domain(_))));
        assert!(Exponent::new(f64::NAN).is_err());
        assert!("0.9".parse::<Exponent>().is_err());
    }

    #[test]
    fn parses_and_prints() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
        assert_eq!(
            "4/3".parse::<Exponent>().unwrap().finite().unwrap(),
            4.0 / 3.0
        );
        for p in ["1", "1.5", "4", "inf", "1.3333333333333333"] {
            let e: Exponent = p.parse().unwrap();
            assert_eq!(e.to_string().parse::<Exponent>().unwrap(), e);
        }
    }
}
