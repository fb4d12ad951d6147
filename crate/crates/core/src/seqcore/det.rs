//! Exact determinants.
//!
//! Orders 1 and 2 are expanded directly. From order 3 up the rational matrix
//! is cleared to integers row by row and reduced with Bareiss' fraction-free
//! elimination, where every division is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Result of a Bareiss run: the determinant plus whether every intermediate
/// division was exact (always true for integer input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BareissOutcome {
    pub det: BigInt,
    pub exact: bool,
}

/// Fraction-free elimination over the integers. Consumes the matrix.
pub fn bareiss(mut m: Vec<Vec<BigInt>>) -> BareissOutcome {
    let n = m.len();
    if n == 0 {
        return BareissOutcome { det: BigInt::one(), exact: true };
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    let mut exact = true;
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return BareissOutcome { det: BigInt::zero(), exact },
            }
        }
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        for row in rest.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..n {
                let num = pivot * &row[j] - &lead * &pivot_row[j];
                let (q, r) = num.div_rem(&prev);
                if !r.is_zero() {
                    exact = false;
                }
                row[j] = q;
            }
            row[k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    BareissOutcome { det: if sign { -det } else { det }, exact }
}

/// Determinant of a small integer matrix given by reference.
pub fn det_int(m: &[Vec<&BigInt>]) -> BigInt {
    match m.len() {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => bareiss(m.iter().map(|row| row.iter().map(|&x| x.clone()).collect()).collect()).det,
    }
}

/// Exact determinant of a square rational matrix.
pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    match n {
        0 => Rational::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {
            let mut scale = BigInt::one();
            let rows: Vec<Vec<BigInt>> = m
                .iter()
                .map(|row| {
                    let d = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                    let ints = row.iter().map(|q| q.numer() * (&d / q.denom())).collect();
                    scale *= d;
                    ints
                })
                .collect();
            Rational::new(bareiss(rows).det, scale)
        }
    }
}

/// Laplace expansion along the first row. Exponential; used as a reference
/// for small orders.
pub fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Rational::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

pub fn sign_of(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn ints(m: &[&[i64]]) -> Vec<Vec<BigInt>> {
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn bareiss_small() {
        let out = bareiss(ints(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]));
        assert_eq!(out.det, BigInt::from(2 * (3 - 2) - 0 + (1 - 3)));
        assert!(out.exact);
    }

    #[test]
    fn bareiss_needs_pivot_swap() {
        let out = bareiss(ints(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]));
        assert_eq!(out.det, BigInt::from(-1));
    }

    #[test]
    fn bareiss_singular() {
        let out = bareiss(ints(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]));
        assert_eq!(out.det, BigInt::zero());
    }

    #[test]
    fn rational_matches_cofactor() {
        let m = vec![
            vec![ratio(1, 2), rat(3), ratio(-2, 7)],
            vec![rat(0), ratio(5, 3), rat(1)],
            vec![ratio(4, 9), rat(-1), ratio(1, 5)],
        ];
        assert_eq!(det_rational(&m), cofactor_det(&m));
    }

    #[test]
    fn empty_and_unit() {
        assert_eq!(det_rational(&[]), rat(1));
        assert_eq!(cofactor_det(&[vec![rat(5)]]), rat(5));
    }
}
