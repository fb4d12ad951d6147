//! Coefficient sequences and minors of their upper-triangular Toeplitz matrix.
//!
//! A [`CoeffSeq`] holds `c_0..=c_W`. The Toeplitz matrix has entry
//! `c_{j-i}` at row `i`, column `j`; indices below zero read as `0`, indices
//! past `W` are an error rather than an implicit zero.

pub mod det;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{PfError, Result};
use crate::rational::{common_denominator, parse_rational, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CoeffSeqRepr", into = "CoeffSeqRepr")]
pub struct CoeffSeq {
    coeffs: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct CoeffSeqRepr {
    #[serde(with = "serde_str::vec")]
    coeffs: Vec<Rational>,
}

impl TryFrom<CoeffSeqRepr> for CoeffSeq {
    type Error = PfError;
    fn try_from(r: CoeffSeqRepr) -> Result<Self> {
        CoeffSeq::new(r.coeffs)
    }
}

impl From<CoeffSeq> for CoeffSeqRepr {
    fn from(c: CoeffSeq) -> Self {
        CoeffSeqRepr { coeffs: c.coeffs }
    }
}

impl CoeffSeq {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PfError::EmptySequence);
        }
        Ok(CoeffSeq { coeffs })
    }

    /// Like [`CoeffSeq::new`] but also requires `c_0 = 1`.
    pub fn normalized(coeffs: Vec<Rational>) -> Result<Self> {
        let seq = CoeffSeq::new(coeffs)?;
        if !seq.coeffs[0].is_one() {
            return Err(PfError::NotNormalized(seq.coeffs[0].to_string()));
        }
        Ok(seq)
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(values: I) -> Result<Self> {
        CoeffSeq::new(values.into_iter().map(|v| Rational::from_integer(v.into())).collect())
    }

    /// Last index `W`.
    pub fn window(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// `c_k`, with `c_k = 0` for `k < 0`.
    pub fn value(&self, k: i64) -> Result<Rational> {
        if k < 0 {
            return Ok(Rational::zero());
        }
        self.coeffs
            .get(k as usize)
            .cloned()
            .ok_or(PfError::IndexOutOfWindow { index: k, window: self.window() })
    }

    /// Prefix `c_0..=c_w`.
    pub fn truncate(&self, w: usize) -> Result<CoeffSeq> {
        if w > self.window() {
            return Err(PfError::IndexOutOfWindow { index: w as i64, window: self.window() });
        }
        CoeffSeq::new(self.coeffs[..=w].to_vec())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// `(k, coeff)` table with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,coeff\n");
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }

    /// Parses the `k,coeff` table written by [`CoeffSeq::to_csv`]; rows must
    /// be numbered `0, 1, 2, ...`.
    pub fn from_csv(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some("k,coeff") => {}
            other => return Err(PfError::Parse(format!("expected header k,coeff, found {other:?}"))),
        }
        let mut coeffs = Vec::new();
        for line in lines {
            let (k, v) = line
                .split_once(',')
                .ok_or_else(|| PfError::Parse(format!("malformed row {line:?}")))?;
            if k.trim().parse::<usize>().ok() != Some(coeffs.len()) {
                return Err(PfError::Parse(format!("expected index {}, found {k:?}", coeffs.len())));
            }
            coeffs.push(parse_rational(v.trim())?);
        }
        CoeffSeq::new(coeffs)
    }
}

/// The entry `c_{j-i}` of the Toeplitz matrix.
pub fn toeplitz_entry(c: &CoeffSeq, i: usize, j: usize) -> Result<Rational> {
    c.value(j as i64 - i as i64)
}

/// The prefix `c_0..=c_w` cleared to a common denominator: `c_k = nums[k] / denom`.
#[derive(Debug, Clone)]
pub struct IntSeq {
    pub nums: Vec<BigInt>,
    pub denom: BigInt,
    zero: BigInt,
}

impl IntSeq {
    pub fn new(c: &CoeffSeq, w: usize) -> Result<Self> {
        if w > c.window() {
            return Err(PfError::IndexOutOfWindow { index: w as i64, window: c.window() });
        }
        let slice = &c.coeffs()[..=w];
        let denom = common_denominator(slice);
        let nums = slice.iter().map(|q| q.numer() * (&denom / q.denom())).collect();
        Ok(IntSeq { nums, denom, zero: BigInt::zero() })
    }

    /// Numerator of `c_k`; zero for `k < 0`. Panics past the prefix.
    pub fn at(&self, k: i64) -> &BigInt {
        if k < 0 {
            &self.zero
        } else {
            &self.nums[k as usize]
        }
    }

    /// Integer determinant of the Toeplitz minor; the rational value is this
    /// divided by `denom^n`.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> BigInt {
        let m: Vec<Vec<&BigInt>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| self.at(j as i64 - i as i64)).collect())
            .collect();
        det::det_int(&m)
    }

    /// Integer determinant of `det ||c_{k+j-i}||_{i,j=1..n}`.
    pub fn contiguous(&self, k: usize, n: usize) -> BigInt {
        let m: Vec<Vec<&BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| self.at(k as i64 + j as i64 - i as i64)).collect())
            .collect();
        det::det_int(&m)
    }

    pub fn to_rational(&self, value: BigInt, order: usize) -> Rational {
        Rational::new(value, num_traits::pow(self.denom.clone(), order))
    }
}

/// Row and column index sets of a square minor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinorSpec {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MinorSpec {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(PfError::InvalidMinor("order must be at least 1".into()));
        }
        if rows.len() != cols.len() {
            return Err(PfError::InvalidMinor(format!(
                "{} rows but {} columns",
                rows.len(),
                cols.len()
            )));
        }
        let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&rows) || !increasing(&cols) {
            return Err(PfError::InvalidMinor("indices must be strictly increasing".into()));
        }
        Ok(MinorSpec { rows, cols })
    }

    /// The minor `||c_{k+j-i}||_{i,j=1..n}`: rows `0..n`, columns `k..k+n`.
    pub fn contiguous(k: usize, n: usize) -> Self {
        MinorSpec { rows: (0..n).collect(), cols: (k..k + n).collect() }
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    /// Largest coefficient index the minor reads.
    pub fn max_index(&self) -> i64 {
        self.cols.last().copied().unwrap_or(0) as i64 - self.rows.first().copied().unwrap_or(0) as i64
    }
}

pub fn minor_matrix(c: &CoeffSeq, spec: &MinorSpec) -> Result<Vec<Vec<Rational>>> {
    spec.rows
        .iter()
        .map(|&i| spec.cols.iter().map(|&j| toeplitz_entry(c, i, j)).collect())
        .collect()
}

/// Exact value of the Toeplitz minor selected by `spec`.
pub fn minor_det(c: &CoeffSeq, spec: &MinorSpec) -> Result<Rational> {
    if spec.max_index() > c.window() as i64 {
        return Err(PfError::IndexOutOfWindow { index: spec.max_index(), window: c.window() });
    }
    Ok(det::det_rational(&minor_matrix(c, spec)?))
}

/// All index sets of size `n` drawn from `0..=window`, lexicographic.
pub fn index_sets(window: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=window).combinations(n)
}

/// Every minor with rows and columns in `0..=window` and order at most
/// `max_order`, ordered by `(order, rows, cols)` lexicographically.
pub fn enumerate_minors(window: usize, max_order: usize) -> impl Iterator<Item = MinorSpec> {
    (1..=max_order.min(window + 1)).flat_map(move |n| {
        index_sets(window, n).flat_map(move |rows| {
            index_sets(window, n).map(move |cols| MinorSpec { rows: rows.clone(), cols })
        })
    })
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `sum_{n=1..max_order} C(window+1, n)^2`, saturating.
pub fn count_minors(window: usize, max_order: usize) -> u128 {
    (1..=max_order as u128)
        .map(|n| {
            let b = binomial(window as u128 + 1, n);
            b.saturating_mul(b)
        })
        .fold(0u128, |a, b| a.saturating_add(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn csv_round_trip() {
        let c = CoeffSeq::new(vec![rat(1), ratio(-3, 4), rat(0)]).unwrap();
        assert_eq!(CoeffSeq::from_csv(&c.to_csv()).unwrap(), c);
        assert!(CoeffSeq::from_csv("k,coeff\n1,2\n").is_err());
        assert!(CoeffSeq::from_csv("n,b\n0,1\n").is_err());
        assert!(CoeffSeq::from_csv("k,coeff\n").is_err());
    }

    fn seq(v: &[i64]) -> CoeffSeq {
        CoeffSeq::from_integers(v.iter().copied()).unwrap()
    }

    #[test]
    fn toeplitz_entries() {
        assert_eq!(toeplitz_entry(&seq(&[1, 1]), 1, 0).unwrap(), rat(0));
        assert_eq!(toeplitz_entry(&seq(&[1, 3, 6]), 0, 2).unwrap(), rat(6));
        let inv2 = seq(&[1, 2, 3, 4, 5, 6]);
        assert_eq!(toeplitz_entry(&inv2, 2, 5).unwrap(), rat(4));
        assert!(matches!(
            toeplitz_entry(&seq(&[1, 1]), 0, 2),
            Err(PfError::IndexOutOfWindow { index: 2, window: 1 })
        ));
    }

    #[test]
    fn minor_examples() {
        let spec = MinorSpec::new(vec![0, 1], vec![1, 2]).unwrap();
        assert_eq!(minor_det(&seq(&[1, 1, 0]), &spec).unwrap(), rat(1));
        assert_eq!(minor_det(&seq(&[1, 0, 1]), &spec).unwrap(), rat(-1));
        let c = CoeffSeq::new(vec![ratio(3, 7), rat(2)]).unwrap();
        for k in 0..4 {
            let d = MinorSpec::new(vec![k], vec![k]).unwrap();
            assert_eq!(minor_det(&c, &d).unwrap(), ratio(3, 7));
        }
    }

    #[test]
    fn minor_out_of_window() {
        let spec = MinorSpec::new(vec![0], vec![3]).unwrap();
        assert!(minor_det(&seq(&[1, 1]), &spec).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(MinorSpec::new(vec![], vec![]).is_err());
        assert!(MinorSpec::new(vec![0, 1], vec![1]).is_err());
        assert!(MinorSpec::new(vec![1, 1], vec![0, 1]).is_err());
        assert!(MinorSpec::new(vec![2, 1], vec![0, 1]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let all: Vec<_> = enumerate_minors(1, 1).collect();
        assert_eq!(
            all,
            vec![
                MinorSpec { rows: vec![0], cols: vec![0] },
                MinorSpec { rows: vec![0], cols: vec![1] },
                MinorSpec { rows: vec![1], cols: vec![0] },
                MinorSpec { rows: vec![1], cols: vec![1] },
            ]
        );
        assert_eq!(enumerate_minors(2, 2).count(), 18);
        assert_eq!(enumerate_minors(3, 2).count(), 52);
        assert_eq!(count_minors(3, 2), 52);
    }

    #[test]
    fn enumeration_is_sorted() {
        let all: Vec<_> = enumerate_minors(4, 3).collect();
        let keys: Vec<_> = all.iter().map(|m| (m.order(), m.rows.clone(), m.cols.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn json_round_trip() {
        let c = CoeffSeq::new(vec![rat(1), ratio(-3, 4), rat(0)]).unwrap();
        let s = c.to_json();
        assert_eq!(s, r#"{"coeffs":["1","-3/4","0"]}"#);
        assert_eq!(CoeffSeq::from_json(&s).unwrap(), c);
        assert!(CoeffSeq::from_json(r#"{"coeffs":[]}"#).is_err());
    }

    #[test]
    fn normalization_flag() {
        assert!(CoeffSeq::normalized(vec![rat(2)]).is_err());
        assert!(CoeffSeq::normalized(vec![rat(1), rat(5)]).is_ok());
    }

    #[test]
    fn int_seq_contiguous_matches_rational() {
        let c = CoeffSeq::new(vec![rat(1), ratio(1, 2), ratio(1, 3), ratio(1, 5)]).unwrap();
        let ints = IntSeq::new(&c, 3).unwrap();
        for n in 1..=2 {
            for k in 0..=2 {
                let v = ints.to_rational(ints.contiguous(k, n), n);
                assert_eq!(v, minor_det(&c, &MinorSpec::contiguous(k, n)).unwrap());
            }
        }
    }
}
