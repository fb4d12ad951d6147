//! Exact scalars: arbitrary-precision rationals and Gaussian rationals.
//!
//! `Rational` is `num_rational::BigRational`, which keeps every value in
//! lowest terms with a positive denominator. Its textual form is `"p/q"`, or
//! `"p"` when `q = 1`; the serde helpers below use that form so JSON
//! round-trips are bit-exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PfError, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || PfError::Parse(format!("not a rational: {s:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(PfError::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    q.to_string()
}

/// Decimal expansion of `q` truncated toward zero after `digits` places.
pub fn fmt_decimal(q: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (q.numer().abs() * &scale) / q.denom();
    let s = scaled.to_string();
    let s = if s.len() <= digits { format!("{}{s}", "0".repeat(digits + 1 - s.len())) } else { s };
    let (int_part, frac) = s.split_at(s.len() - digits);
    let sign = if q.is_negative() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Rising product `(from)(from+1)...(from+len-1)`; empty product is 1.
pub fn rising(from: i64, len: u64) -> BigInt {
    (0..len as i64).fold(BigInt::one(), |acc, t| acc * (from + t))
}

pub fn pow_rational(q: &Rational, mut e: u64) -> Rational {
    let mut base = q.clone();
    let mut acc = Rational::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Floor of the square root of a non-negative rational, to `bits` binary
/// digits after the point. Returns `(lower, upper)` with
/// `lower^2 <= q <= upper^2` and `upper - lower <= 2^-bits`.
pub fn sqrt_enclosure(q: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(!q.is_negative(), "sqrt of negative rational");
    if q.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    // sqrt(n/d) = sqrt(n*d) / d
    let n = q.numer();
    let d = q.denom();
    let scale = BigInt::one() << bits;
    let radicand = (n * d * &scale * &scale).to_biguint().expect("non-negative");
    let root: BigUint = radicand.sqrt();
    let root = BigInt::from(root);
    let denom = d * &scale;
    let lower = Rational::new(root.clone(), denom.clone());
    let upper = if &lower * &lower == *q {
        lower.clone()
    } else {
        Rational::new(root + 1, denom)
    };
    (lower, upper)
}

pub fn sqrt_upper(q: &Rational) -> Rational {
    sqrt_enclosure(q, 64).1
}

pub fn sqrt_lower(q: &Rational) -> Rational {
    sqrt_enclosure(q, 64).0
}

/// Exact square root when `q` is the square of a rational.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().to_biguint()?;
    let d = q.denom().to_biguint()?;
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &rn * &rn == n && &rd * &rd == d {
        Some(Rational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// Gaussian rational `re + i*im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        ComplexRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        ComplexRational { re, im: Rational::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        ComplexRational::new(rat(re), rat(im))
    }

    pub fn zero() -> Self {
        ComplexRational::default()
    }

    pub fn one() -> Self {
        ComplexRational::real(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexRational::new(self.re.clone(), -&self.im)
    }

    /// `|z|^2`, exact.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Compares `|z|^2` with `r` by integer cross-multiplication, avoiding the
    /// gcds of forming `|z|^2` when the parts have large denominators.
    pub fn cmp_norm_sqr(&self, r: &Rational) -> std::cmp::Ordering {
        let (a, p) = (self.re.numer(), self.re.denom());
        let (b, q) = (self.im.numer(), self.im.denom());
        let pq = p * q;
        let lhs = ((a * q).pow(2u32) + (b * p).pow(2u32)) * r.denom();
        lhs.cmp(&(r.numer() * &pq * &pq))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        ComplexRational::new(&self.re * s, &self.im * s)
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(ComplexRational::new(&self.re / &n, -&self.im / &n))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self * &inv)
    }

    pub fn dist_sqr(&self, other: &Self) -> Rational {
        (self - other).norm_sqr()
    }

    /// Real dot product of the two points viewed as plane vectors.
    pub fn dot(&self, other: &Self) -> Rational {
        &self.re * &other.re + &self.im * &other.im
    }

    /// z-component of the plane cross product.
    pub fn cross(&self, other: &Self) -> Rational {
        &self.re * &other.im - &self.im * &other.re
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl<'a> Add<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn add(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn sub(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn mul(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-&self.re, -&self.im)
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexRepr {
    re: String,
    im: String,
}

impl Serialize for ComplexRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexRepr { re: self.re.to_string(), im: self.im.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ComplexRepr::deserialize(d)?;
        let re = parse_rational(&repr.re).map_err(serde::de::Error::custom)?;
        let im = parse_rational(&repr.im).map_err(serde::de::Error::custom)?;
        Ok(ComplexRational { re, im })
    }
}

/// serde adapters that write rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strings: Vec<String> = v.iter().map(|q| q.to_string()).collect();
            strings.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            let strings = Vec::<String>::deserialize(d)?;
            strings
                .iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_some(&q.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }

    pub mod table {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strings: Vec<Vec<String>> =
                v.iter().map(|row| row.iter().map(|q| q.to_string()).collect()).collect();
            strings.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            let strings = Vec::<Vec<String>>::deserialize(d)?;
            strings
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
