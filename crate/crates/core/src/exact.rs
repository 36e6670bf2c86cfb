//! Exact extended nonnegative rational arithmetic: the codomain `[0, inf]`
//! of every measure in the kernel.
//!
//! Values are arbitrary-precision rationals in lowest terms plus a single
//! absorbing point at infinity. The multiplication convention is
//! `0 * inf = inf * 0 = 0`, which makes a null set crossed with an
//! infinite-measure set null. All comparisons are exact; there are no
//! epsilon tolerances anywhere in the crate.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact value in `[0, inf]`.
///
/// Finite values are kept in lowest terms with a positive denominator
/// (`BigRational` canonicalizes on construction). The derived structural
/// equality is therefore canonical-form equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtReal {
    Finite(BigRational),
    Infinity,
}

impl ExtReal {
    pub fn zero() -> Self {
        ExtReal::Finite(BigRational::zero())
    }

    pub fn one() -> Self {
        ExtReal::Finite(BigRational::one())
    }

    pub fn infinity() -> Self {
        ExtReal::Infinity
    }

    /// Finite value `num/den`. Panics if `den == 0`; intended for literals in
    /// tests and generators. Use [`ExtReal::from_str`] for untrusted input.
    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        ExtReal::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(n: u64) -> Self {
        ExtReal::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    /// Wraps a rational, rejecting negatives.
    pub fn from_rational(r: BigRational) -> crate::Result<Self> {
        if r.is_negative() {
            return Err(Error::Parse(format!("negative value {} not in [0, inf]", r)));
        }
        Ok(ExtReal::Finite(r))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtReal::Finite(r) if r.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExtReal::Finite(r) => Some(r),
            ExtReal::Infinity => None,
        }
    }

    /// Exact sum; infinity absorbs.
    pub fn add(&self, other: &ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinity,
        }
    }

    /// Exact product under the `0 * inf = 0` convention.
    pub fn mul(&self, other: &ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a * b),
            (ExtReal::Finite(a), ExtReal::Infinity) | (ExtReal::Infinity, ExtReal::Finite(a)) => {
                if a.is_zero() {
                    ExtReal::zero()
                } else {
                    ExtReal::Infinity
                }
            }
            (ExtReal::Infinity, ExtReal::Infinity) => ExtReal::Infinity,
        }
    }

    /// Exact quotient where defined: division by zero and `inf/inf` are
    /// `None`; a finite value over infinity is zero; infinity over a
    /// positive finite value stays infinite.
    pub fn checked_div(&self, other: &ExtReal) -> Option<ExtReal> {
        match (self, other) {
            (_, ExtReal::Finite(b)) if b.is_zero() => None,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some(ExtReal::Finite(a / b)),
            (ExtReal::Finite(_), ExtReal::Infinity) => Some(ExtReal::zero()),
            (ExtReal::Infinity, ExtReal::Finite(_)) => Some(ExtReal::Infinity),
            (ExtReal::Infinity, ExtReal::Infinity) => None,
        }
    }

    /// Total-order comparison; every finite value is below infinity.
    pub fn cmp_ext(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinity) => Ordering::Less,
            (ExtReal::Infinity, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::Infinity, ExtReal::Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_ext(other)
    }
}

impl Add for &ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: &ExtReal) -> ExtReal {
        ExtReal::add(self, rhs)
    }
}

impl Mul for &ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: &ExtReal) -> ExtReal {
        ExtReal::mul(self, rhs)
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::zero(), |acc, x| ExtReal::add(&acc, &x))
    }
}

impl<'a> Sum<&'a ExtReal> for ExtReal {
    fn sum<I: Iterator<Item = &'a ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::zero(), |acc, x| ExtReal::add(&acc, x))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtReal {
    type Err = Error;

    /// Accepts `"inf"`, `"num/den"` in lowest terms, or integer shorthand `"k"`.
    fn from_str(s: &str) -> crate::Result<Self> {
        if s == "inf" {
            return Ok(ExtReal::Infinity);
        }
        let r = parse_rational(s)?;
        ExtReal::from_rational(r)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Parses a signed rational in canonical form: `"p/q"` with `q >= 1` and
/// `gcd(|p|, q) = 1`, or integer shorthand `"k"`. Non-canonical inputs such
/// as `"2/4"` or `"3/-1"` are rejected with a precise message rather than
/// silently normalized.
pub fn parse_rational(s: &str) -> crate::Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_str
        .parse()
        .map_err(|_| Error::Parse(format!("invalid numerator in {:?}", s)))?;
    let den: BigInt = den_str
        .parse()
        .map_err(|_| Error::Parse(format!("invalid denominator in {:?}", s)))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {:?}", s)));
    }
    if den.is_negative() {
        return Err(Error::Parse(format!(
            "non-canonical rational {:?}: denominator must be positive",
            s
        )));
    }
    let r = BigRational::new(num.clone(), den.clone());
    if r.numer() != &num || r.denom() != &den {
        return Err(Error::Parse(format!(
            "non-canonical rational {:?}: expected lowest terms {}/{}",
            s,
            r.numer(),
            r.denom()
        )));
    }
    Ok(r)
}

/// Formats a rational as canonical `"p/q"` (always with the denominator, so
/// the output parses back under the same grammar).
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Convenience constructor for signed rational literals in tests and generators.
pub fn rat(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
