//! Dual-mode probability values: exact rationals or IEEE-754 doubles.
//!
//! Exact mode backs every finite-chain oracle in the test-suite; approximate
//! mode is used for large propagated computations where rational blow-up
//! would be prohibitive. Mixing modes in arithmetic demotes to approximate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};
use std::str::FromStr;

/// Tolerance used when checking that an approximate distribution sums to one.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Entries below this threshold are pruned from approximate distributions.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// A probability-like quantity, either an exact rational or a float64.
#[derive(Clone, Debug)]
pub enum Prob {
    Exact(BigRational),
    Approx(f64),
}

impl Prob {
    pub fn zero() -> Self {
        Prob::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob::Exact(BigRational::one())
    }

    pub fn exact_zero() -> Self {
        Prob::Exact(BigRational::zero())
    }

    pub fn approx(v: f64) -> Self {
        Prob::Approx(v)
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Prob::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Prob::Exact(r)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Prob::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_zero(),
            Prob::Approx(v) => *v == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_one(),
            Prob::Approx(v) => *v == 1.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_positive(),
            Prob::Approx(v) => *v > 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Prob::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Approx(_) => None,
        }
    }

    /// Coerce to the approximate representation.
    pub fn demote(&self) -> Prob {
        Prob::Approx(self.to_f64())
    }

    pub fn abs(&self) -> Prob {
        match self {
            Prob::Exact(r) => Prob::Exact(r.abs()),
            Prob::Approx(v) => Prob::Approx(v.abs()),
        }
    }

    pub fn min(self, other: Prob) -> Prob {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Prob) -> Prob {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Parse either a decimal ("0.25") or a ratio ("2/3").
    pub fn parse(s: &str) -> Result<Prob, String> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator: {e}"))?;
            let den = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator: {e}"))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Prob::Exact(BigRational::new(num, den)))
        } else if s.contains('.') || s.contains('e') || s.contains('E') {
            // decimals with a short fractional part are kept exact
            if let Some((int_part, frac_part)) = s.split_once('.') {
                if !s.contains('e') && !s.contains('E') && frac_part.len() <= 15 {
                    let digits = format!("{}{}", int_part, frac_part);
                    let num =
                        BigInt::from_str(&digits).map_err(|e| format!("bad decimal: {e}"))?;
                    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
                    return Ok(Prob::Exact(BigRational::new(num, den)));
                }
            }
            let v: f64 = s.parse().map_err(|e| format!("bad float: {e}"))?;
            Ok(Prob::Approx(v))
        } else {
            let num = BigInt::from_str(s).map_err(|e| format!("bad integer: {e}"))?;
            Ok(Prob::Exact(BigRational::from_integer(num)))
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Prob::Approx(v) => write!(f, "{:.12e}", v),
        }
    }
}

impl serde::Serialize for Prob {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl PartialEq for Prob {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Prob {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Prob {
            type Output = Prob;
            fn $method(self, rhs: Prob) -> Prob {
                match (self, rhs) {
                    (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a $op b),
                    (a, b) => Prob::Approx(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl<'a> $trait<&'a Prob> for &'a Prob {
            type Output = Prob;
            fn $method(self, rhs: &'a Prob) -> Prob {
                match (self, rhs) {
                    (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a $op b),
                    (a, b) => Prob::Approx(a.to_f64() $op b.to_f64()),
                }
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Prob {
    type Output = Prob;
    fn neg(self) -> Prob {
        match self {
            Prob::Exact(r) => Prob::Exact(-r),
            Prob::Approx(v) => Prob::Approx(-v),
        }
    }
}

impl AddAssign for Prob {
    fn add_assign(&mut self, rhs: Prob) {
        let lhs = std::mem::replace(self, Prob::Approx(0.0));
        *self = lhs + rhs;
    }
}

impl MulAssign for Prob {
    fn mul_assign(&mut self, rhs: Prob) {
        let lhs = std::mem::replace(self, Prob::Approx(0.0));
        *self = lhs * rhs;
    }
}

impl std::iter::Sum for Prob {
    fn sum<I: Iterator<Item = Prob>>(iter: I) -> Prob {
        iter.fold(Prob::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(Prob::parse("2/3").unwrap(), Prob::from_ratio(2, 3));
        assert_eq!(Prob::parse("0.25").unwrap(), Prob::from_ratio(1, 4));
        assert_eq!(Prob::parse("1").unwrap(), Prob::one());
        assert!(Prob::parse("1/0").is_err());
    }

    #[test]
    fn arithmetic_keeps_exactness() {
        let a = Prob::from_ratio(1, 3);
        let b = Prob::from_ratio(2, 3);
        assert!((a.clone() + b.clone()).is_one());
        assert!((a + b).is_exact());
        let mixed = Prob::from_ratio(1, 2) * Prob::approx(0.5);
        assert!(!mixed.is_exact());
        assert_eq!(mixed.to_f64(), 0.25);
    }

    #[test]
    fn ordering() {
        assert!(Prob::from_ratio(1, 3) < Prob::from_ratio(1, 2));
        assert!(Prob::approx(0.4) > Prob::from_ratio(1, 3));
    }

    #[test]
    fn display() {
        assert_eq!(Prob::from_ratio(2, 3).to_string(), "2/3");
        assert_eq!(Prob::from_ratio(4, 2).to_string(), "2");
    }
}
