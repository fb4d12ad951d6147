//! Deflation `(1 - z/T) f(z)`, the `e^{eps z}` mollifier with its
//! Cauchy-Binet expansion, radius estimates, and boundary-limit partial sums.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::exp_coeffs;
use crate::error::{PfError, Result};
use crate::pf_check::{check_all_minors, PfVerdict};
use crate::rational::{fmt_decimal, serde_str, Rational};
use crate::seqcore::det::det_rational;
use crate::seqcore::{CoeffSeq, IntSeq};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeflationResult {
    #[serde(flatten)]
    pub deflated: CoeffSeq,
    #[serde(rename = "T", with = "serde_str")]
    pub t: Rational,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<PfVerdict>,
    /// Present when `T` was estimated rather than supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<RadiusBracket>,
}

impl DeflationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_t(t: &Rational) -> Result<()> {
    if t.is_positive() {
        Ok(())
    } else {
        Err(PfError::NonPositiveT(t.to_string()))
    }
}

/// `c_k - c_{k-1}/T` applied `steps` times, no precondition on `c`.
pub fn deflate_unchecked(c: &CoeffSeq, t: &Rational, steps: usize) -> Result<DeflationResult> {
    check_t(t)?;
    if steps == 0 {
        return Err(PfError::ParameterOutOfRange("steps must be at least 1".into()));
    }
    let inv = t.recip();
    let mut cur = c.coeffs().to_vec();
    for _ in 0..steps {
        let mut next = Vec::with_capacity(cur.len());
        next.push(cur[0].clone());
        next.extend(cur.windows(2).map(|w| &w[1] - &w[0] * &inv));
        cur = next;
    }
    Ok(DeflationResult { deflated: CoeffSeq::new(cur)?, t: t.clone(), steps, verdict: None, radius: None })
}

/// Deflation of a strictly positive sequence.
pub fn deflate(c: &CoeffSeq, t: &Rational, steps: usize) -> Result<DeflationResult> {
    check_t(t)?;
    if let Some(k) = c.coeffs().iter().position(|v| !v.is_positive()) {
        return Err(PfError::NotPositive(k));
    }
    deflate_unchecked(c, t, steps)
}

/// [`deflate`] plus the all-minors verdict at order `r - steps` on `0..=window`.
pub fn deflate_checked(c: &CoeffSeq, t: &Rational, steps: usize, r: usize, window: usize) -> Result<DeflationResult> {
    if r <= steps {
        return Err(PfError::ParameterOutOfRange(format!("order r = {r} must exceed steps = {steps}")));
    }
    let mut res = deflate(c, t, steps)?;
    res.verdict = Some(check_all_minors(&res.deflated, r - steps, window)?);
    Ok(res)
}

/// Ratio-based bracket for the radius of convergence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusBracket {
    #[serde(rename = "T_lo", with = "serde_str")]
    pub t_lo: Rational,
    /// `None` stands for infinity: a finite window cannot bound `T` above.
    #[serde(rename = "T_hi", with = "serde_str::option")]
    pub t_hi: Option<Rational>,
    /// `c_{k+1}/c_k` for `k = 0..W-1`.
    #[serde(with = "serde_str::vec")]
    pub ratios: Vec<Rational>,
    pub monotone: bool,
    /// Indices `k` with `ratio_{k+1} > ratio_k`.
    pub violations: Vec<usize>,
}

pub fn estimate_radius(c: &CoeffSeq) -> Result<RadiusBracket> {
    let cs = c.coeffs();
    if cs.len() < 2 {
        return Err(PfError::ParameterOutOfRange("need at least two coefficients".into()));
    }
    for (k, v) in cs.iter().enumerate() {
        if v.is_zero() {
            return Err(PfError::ZeroCoefficient(k));
        }
        if v.is_negative() {
            return Err(PfError::NotPositive(k));
        }
    }
    let ratios: Vec<Rational> = cs.windows(2).map(|w| &w[1] / &w[0]).collect();
    let violations: Vec<usize> = ratios.windows(2).positions(|w| w[1] > w[0]).collect();
    let monotone = violations.is_empty();
    let t_lo = if monotone {
        ratios.last().expect("at least one ratio").recip()
    } else {
        ratios.iter().max().expect("at least one ratio").recip()
    };
    Ok(RadiusBracket { t_lo, t_hi: None, ratios, monotone, violations })
}

/// `a_k = sum_{m <= k} c_m eps^{k-m}/(k-m)!` for `k <= w`.
pub fn mollify(c1: &CoeffSeq, eps: &Rational, w: usize) -> Result<CoeffSeq> {
    if eps.is_negative() {
        return Err(PfError::ParameterOutOfRange(format!("epsilon = {eps} must be non-negative")));
    }
    if w > c1.window() {
        return Err(PfError::IndexOutOfWindow { index: w as i64, window: c1.window() });
    }
    let b = exp_coeffs(eps, w);
    let cs = c1.coeffs();
    let a = (0..=w)
        .into_par_iter()
        .map(|k| (0..=k).map(|m| &cs[m] * &b[k - m]).sum())
        .collect();
    CoeffSeq::new(a)
}

fn at(v: &[Rational], k: i64) -> Rational {
    if k < 0 {
        Rational::zero()
    } else {
        v[k as usize].clone()
    }
}

fn contiguous_det(v: &[Rational], k: usize, n: usize) -> Rational {
    let m: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| at(v, k as i64 + j as i64 - i as i64)).collect())
        .collect();
    det_rational(&m)
}

/// `det ||b_{k+j-i}||_{i,j=1..n}` for `b_m = eps^m/m!`.
pub fn exp_minor_positive(eps: &Rational, k: usize, n: usize) -> Result<Rational> {
    if !eps.is_positive() {
        return Err(PfError::ParameterOutOfRange(format!("epsilon = {eps} must be positive")));
    }
    if n == 0 {
        return Err(PfError::ParameterOutOfRange("order n must be at least 1".into()));
    }
    Ok(contiguous_det(&exp_coeffs(eps, k + n), k, n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    /// Middle indices `m_1 < ... < m_n`.
    pub m: Vec<usize>,
    /// Minor of `c1` taken from rows `1..=n` and columns `m`.
    #[serde(with = "serde_str")]
    pub c_minor: Rational,
    /// Minor of the exponential coefficients taken from rows `m`.
    #[serde(with = "serde_str")]
    pub exp_minor: Rational,
    #[serde(with = "serde_str")]
    pub product: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauchyBinetReport {
    pub k: usize,
    pub n: usize,
    #[serde(with = "serde_str")]
    pub lhs: Rational,
    #[serde(with = "serde_str")]
    pub rhs: Rational,
    pub equal: bool,
    pub summands: Vec<Summand>,
    /// Summand for `m_i = i - 1`, equal to `c1_0^n` times the exponential minor.
    #[serde(with = "serde_str")]
    pub distinguished: Rational,
    pub all_nonneg: bool,
}

/// Expands the contiguous minor of the mollified sequence as
/// `det(XY) = sum_M det X[:, M] det Y[M, :]` with `X_{i,m} = c1_{m-i+1}`,
/// `Y_{m,j} = b_{k+j-1-m}`, `m` ranging over `0..=k+n-1`.
pub fn cauchy_binet_check(c1: &CoeffSeq, eps: &Rational, k: usize, n: usize) -> Result<CauchyBinetReport> {
    if n == 0 {
        return Err(PfError::ParameterOutOfRange("order n must be at least 1".into()));
    }
    let top = k + n - 1;
    if top > c1.window() {
        return Err(PfError::IndexOutOfWindow { index: top as i64, window: c1.window() });
    }
    let a = mollify(c1, eps, top)?;
    let lhs = contiguous_det(a.coeffs(), k, n);
    let cs = c1.coeffs();
    let b = exp_coeffs(eps, top);
    let summands: Vec<Summand> = (0..=top)
        .combinations(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|m| {
            let x: Vec<Vec<Rational>> = (1..=n)
                .map(|i| m.iter().map(|&mm| at(cs, mm as i64 - i as i64 + 1)).collect())
                .collect();
            let y: Vec<Vec<Rational>> = m
                .iter()
                .map(|&mm| (1..=n).map(|j| at(&b, (k + j) as i64 - 1 - mm as i64)).collect())
                .collect();
            let c_minor = det_rational(&x);
            let exp_minor = det_rational(&y);
            let product = &c_minor * &exp_minor;
            Summand { m, c_minor, exp_minor, product }
        })
        .collect();
    let rhs: Rational = summands.iter().map(|s| &s.product).sum();
    let distinguished = summands[0].product.clone();
    let all_nonneg = summands.iter().all(|s| !s.product.is_negative());
    Ok(CauchyBinetReport { k, n, equal: lhs == rhs, lhs, rhs, summands, distinguished, all_nonneg })
}

/// Relative size of the estimated truncation tail above which a value is flagged.
pub const TAIL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitPoint {
    #[serde(with = "serde_str")]
    pub x: Rational,
    /// `(1 - x/T)^power * sum_{k <= W} c_k x^k`, exact but not necessarily
    /// in lowest terms.
    #[serde(with = "serde_str")]
    pub value: Rational,
    /// The neglected tail `sum_{k > W}` may matter at this `x`.
    pub tail_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryLimit {
    #[serde(rename = "T", with = "serde_str")]
    pub t: Rational,
    pub power: u32,
    pub window: usize,
    pub points: Vec<LimitPoint>,
}

impl BoundaryLimit {
    /// `x,value` table, values truncated to 30 decimal places. The JSON form
    /// keeps them exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.x, fmt_decimal(&p.value, 30)));
        }
        out
    }

    pub fn tail_flag(&self) -> bool {
        self.points.iter().any(|p| p.tail_flag)
    }
}

struct Split {
    s: BigInt,
    p: BigInt,
    q: BigInt,
}

const SPLIT_LEAF: usize = 32;

/// `S(a,b) = sum_{a <= k < b} n_k p^{k-a} q^{b-1-k}` with `p^{b-a}`, `q^{b-a}`.
fn split(nums: &[BigInt], p: &BigInt, q: &BigInt) -> Split {
    if nums.len() <= SPLIT_LEAF {
        let mut s = BigInt::zero();
        let mut pp = BigInt::one();
        let mut qq = BigInt::one();
        for v in nums {
            s = s * q + v * &pp;
            pp *= p;
            qq *= q;
        }
        return Split { s, p: pp, q: qq };
    }
    let mid = nums.len() / 2;
    let (l, r) = rayon::join(|| split(&nums[..mid], p, q), || split(&nums[mid..], p, q));
    Split { s: l.s * &r.q + &l.p * r.s, p: l.p * r.p, q: l.q * r.q }
}

/// Exact `sum_k nums[k] x^k`, returned as numerator over `q^{len-1}`.
fn poly_eval(nums: &[BigInt], x: &Rational) -> (BigInt, BigInt) {
    let sp = split(nums, x.numer(), x.denom());
    (sp.s, sp.q / x.denom())
}

fn ln_abs_int(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).abs().ln();
    }
    let shift = bits - 60;
    let top = (v.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_abs(q: &Rational) -> f64 {
    ln_abs_int(q.numer()) - ln_abs_int(q.denom())
}

/// Candidate divisors of `h`: its primes below 2^12 and the cofactor left over.
fn small_factors(h: &BigInt) -> Vec<BigInt> {
    let mut h = h.abs();
    let mut out = Vec::new();
    for f in 3u32..4096 {
        if h.is_one() {
            break;
        }
        let fb = BigInt::from(f);
        if (&h % &fb).is_zero() {
            while (&h % &fb).is_zero() {
                h /= &fb;
            }
            out.push(fb);
        }
    }
    if h > BigInt::one() {
        out.push(h.clone() >> h.trailing_zeros().unwrap_or(0));
    }
    out.retain(|f| !f.is_one());
    out
}

/// `num/den` with the common factors that are cheap to find divided out:
/// powers of two and the divisors of `hints`. A full reduction would need a
/// gcd on integers of up to millions of bits, which is far slower than the
/// evaluation itself, so the result may not be in lowest terms.
fn reduce_cheap(mut num: BigInt, mut den: BigInt, hints: &[&BigInt]) -> Rational {
    if num.is_zero() {
        return Rational::zero();
    }
    let tz = num.trailing_zeros().unwrap_or(0).min(den.trailing_zeros().unwrap_or(0));
    num >>= tz;
    den >>= tz;
    for h in hints.iter().filter(|h| h.bits() <= 256) {
        for f in small_factors(h) {
            while (&num % &f).is_zero() && (&den % &f).is_zero() {
                num /= &f;
                den /= &f;
            }
        }
    }
    Rational::new_raw(num, den)
}

/// Geometric estimate of `sum_{k > W} c_k x^k` against the partial sum.
fn tail_flag(cs: &[Rational], x: &Rational, num: &BigInt, den: &BigInt) -> bool {
    let w = cs.len() - 1;
    if w == 0 || cs[w - 1].is_zero() {
        return !cs[w].is_zero();
    }
    let rho = (&cs[w] / &cs[w - 1]) * x;
    if rho.is_negative() || rho >= Rational::one() {
        return !cs[w].is_zero();
    }
    if cs[w].is_zero() {
        return false;
    }
    let ln_x = ln_abs(x);
    let ln_tail = ln_abs(&cs[w]) + w as f64 * ln_x + ln_abs(&rho) - (Rational::one() - &rho).to_f64().unwrap_or(1.0).ln();
    if num.is_zero() {
        return true;
    }
    ln_tail - (ln_abs_int(num) - ln_abs_int(den)) > TAIL_TOLERANCE.ln()
}

/// `(1 - x/T)^power * sum_{k <= W} c_k x^k` for each `x`, by exact
/// binary-splitting evaluation of the partial sum over the whole window.
pub fn boundary_limit(c: &CoeffSeq, t: &Rational, power: u32, xs: &[Rational]) -> Result<BoundaryLimit> {
    check_t(t)?;
    if let Some(x) = xs.iter().find(|x| !x.is_positive() || *x >= t) {
        return Err(PfError::XOutOfRange(x.to_string()));
    }
    let ints = IntSeq::new(c, c.window())?;
    let points = xs
        .par_iter()
        .map(|x| {
            let (num, den) = poly_eval(&ints.nums, x);
            let den = den * &ints.denom;
            let flag = tail_flag(c.coeffs(), x, &num, &den);
            let f = Rational::one() - x / t;
            let (a, b) = (f.numer().pow(power), f.denom().pow(power));
            let hints = [x.denom(), f.numer(), f.denom(), &ints.denom];
            LimitPoint { x: x.clone(), value: reduce_cheap(a * num, b * den, &hints), tail_flag: flag }
        })
        .collect();
    Ok(BoundaryLimit { t: t.clone(), power, window: c.window(), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::coeffs_inv_pow;
    use crate::pf_check::PfStatus;
    use crate::rational::{pow_rational, rat, ratio};

    fn ones(w: usize) -> CoeffSeq {
        CoeffSeq::from_integers(std::iter::repeat(1).take(w + 1)).unwrap()
    }

    fn dyadic(k: usize) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << k)
    }

    #[test]
    fn closed_forms() {
        let d = deflate(&coeffs_inv_pow(2, 30).unwrap(), &rat(1), 1).unwrap();
        assert_eq!(d.deflated, ones(30));
        let d = deflate(&ones(30), &rat(1), 1).unwrap();
        assert_eq!(d.deflated.coeffs()[0], rat(1));
        assert!(d.deflated.coeffs()[1..].iter().all(|v| v.is_zero()));
        let c = CoeffSeq::new((0..=30).map(|k| rat(k as i64 + 1) * dyadic(k)).collect()).unwrap();
        let d = deflate(&c, &rat(2), 1).unwrap();
        assert_eq!(d.deflated.coeffs(), (0..=30).map(dyadic).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn two_steps_and_errors() {
        let c = CoeffSeq::from_integers((1..=10).map(|k| k * (k + 1) / 2)).unwrap();
        let d = deflate(&c, &rat(1), 2).unwrap();
        assert_eq!(d.deflated, ones(9));
        assert!(matches!(deflate(&c, &rat(0), 1), Err(PfError::NonPositiveT(_))));
        assert!(matches!(deflate(&CoeffSeq::from_integers([1, 0, 1]).unwrap(), &rat(1), 1), Err(PfError::NotPositive(1))));
        assert!(deflate(&c, &rat(1), 0).is_err());
        assert!(deflate_unchecked(&CoeffSeq::from_integers([1, 0, 1]).unwrap(), &rat(1), 1).is_ok());
    }

    #[test]
    fn checked_verdict() {
        let d = deflate_checked(&coeffs_inv_pow(2, 12).unwrap(), &rat(1), 1, 3, 10).unwrap();
        assert_ne!(d.verdict.as_ref().unwrap().status, PfStatus::Fail);
        assert!(deflate_checked(&ones(5), &rat(1), 1, 1, 5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = deflate_checked(&coeffs_inv_pow(2, 4).unwrap(), &rat(1), 1, 2, 4).unwrap();
        let s = d.to_json();
        assert!(s.starts_with(r#"{"coeffs":["1","1","1","1","1"],"T":"1","steps":1,"verdict":"#));
        assert_eq!(DeflationResult::from_json(&s).unwrap(), d);
    }

    #[test]
    fn radius_examples() {
        let c = CoeffSeq::new((0..20).map(dyadic).collect()).unwrap();
        let b = estimate_radius(&c).unwrap();
        assert!(b.ratios.iter().all(|q| *q == ratio(1, 2)));
        assert_eq!(b.t_lo, rat(2));
        assert!(b.t_hi.is_none() && b.monotone);

        let lin = CoeffSeq::from_integers((1..=101).map(|k| k as i64)).unwrap();
        let b = estimate_radius(&lin).unwrap();
        assert_eq!(b.ratios[99], ratio(101, 100));
        assert_eq!(b.t_lo, ratio(100, 101));

        assert_eq!(estimate_radius(&ones(1)).unwrap().t_lo, rat(1));
        assert!(matches!(estimate_radius(&CoeffSeq::from_integers([1, 0, 1]).unwrap()), Err(PfError::ZeroCoefficient(1))));
        assert!(estimate_radius(&ones(0)).is_err());

        let bumpy = CoeffSeq::from_integers([1, 1, 2, 1]).unwrap();
        let b = estimate_radius(&bumpy).unwrap();
        assert!(!b.monotone);
        assert_eq!(b.violations, vec![0]);
        assert_eq!(b.t_lo, ratio(1, 2));
    }

    #[test]
    fn mollify_examples() {
        let c = CoeffSeq::from_integers([3, 1, 4, 1]).unwrap();
        assert_eq!(mollify(&c, &rat(0), 3).unwrap(), c);
        let delta = CoeffSeq::from_integers([1, 0, 0, 0, 0]).unwrap();
        let a = mollify(&delta, &rat(1), 4).unwrap();
        assert_eq!(a.coeffs()[4], ratio(1, 24));
        let a = mollify(&ones(1), &rat(1), 1).unwrap();
        assert_eq!(a.coeffs()[1], rat(2));
        assert!(mollify(&c, &rat(-1), 3).is_err());
        assert!(mollify(&c, &rat(1), 4).is_err());
    }

    #[test]
    fn exp_minors() {
        assert_eq!(exp_minor_positive(&rat(1), 0, 1).unwrap(), rat(1));
        assert_eq!(exp_minor_positive(&rat(1), 0, 2).unwrap(), rat(1));
        assert_eq!(exp_minor_positive(&rat(1), 1, 2).unwrap(), ratio(1, 2));
        assert!(exp_minor_positive(&rat(0), 1, 2).is_err());
        for k in 0..6 {
            for n in 1..4 {
                assert!(exp_minor_positive(&ratio(1, 3), k, n).unwrap().is_positive());
            }
        }
    }

    #[test]
    fn cauchy_binet_examples() {
        let c1 = CoeffSeq::from_integers([1, 1, 1]).unwrap();
        let rep = cauchy_binet_check(&c1, &rat(1), 1, 2).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.summands.len(), 3);
        assert_eq!(rep.distinguished, exp_minor_positive(&rat(1), 1, 2).unwrap());

        let rep = cauchy_binet_check(&c1, &rat(1), 2, 1).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.lhs, mollify(&c1, &rat(1), 2).unwrap().coeffs()[2]);
        assert!(cauchy_binet_check(&c1, &rat(1), 2, 2).is_err());
    }

    #[test]
    fn limits_small() {
        let lim = boundary_limit(&ones(10), &rat(1), 1, &[ratio(1, 2)]).unwrap();
        // (1 - x) (1 - x^11)/(1 - x)
        assert_eq!(lim.points[0].value, rat(1) - pow_rational(&ratio(1, 2), 11));
        assert!(lim.points[0].tail_flag);
        let lim = boundary_limit(&ones(2000), &rat(1), 1, &[ratio(1, 2)]).unwrap();
        assert!(!lim.tail_flag());
        assert!(boundary_limit(&ones(3), &rat(1), 1, &[rat(1)]).is_err());
        assert!(boundary_limit(&ones(3), &rat(1), 1, &[rat(0)]).is_err());
        assert_eq!(lim.to_csv().lines().next(), Some("x,value"));
    }

    #[test]
    fn split_matches_horner() {
        let c = coeffs_inv_pow(2, 300).unwrap();
        let x = ratio(7, 9);
        let horner = c.coeffs().iter().rev().fold(Rational::zero(), |acc, v| acc * &x + v);
        let ints = IntSeq::new(&c, 300).unwrap();
        let (n, d) = poly_eval(&ints.nums, &x);
        assert_eq!(Rational::new(n, d), horner);
    }
}
