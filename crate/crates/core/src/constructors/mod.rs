//! Explicit series: `1/(1-z)^r`, finite Aissen-Schoenberg-Whitney products,
//! the lacunary series `sum z^{k!}`, derivative sequences, and the
//! perturbation `1/(1-z)^{r^2} + eps*g`.

mod perturbation;

pub use perturbation::{
    build_perturbed, epsilon_bound, verify_plan, CertMode, PerturbationPlan, PlanCheck, TailRecord,
};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{PfError, Result};
use crate::rational::{factorial, rising, serde_str, Rational};
use crate::seqcore::CoeffSeq;

/// `a_k(r)` for `k = 0..=w`, the coefficients of `1/(1-z)^r`.
pub fn coeffs_inv_pow(r: usize, w: usize) -> Result<CoeffSeq> {
    if r == 0 {
        return Err(PfError::ParameterOutOfRange("r must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(w + 1);
    let mut a = BigInt::one();
    for k in 0..=w {
        if k > 0 {
            // a_k = a_{k-1} * (k + r - 1) / k
            a = a * (k + r - 1) / k;
        }
        out.push(Rational::from_integer(a.clone()));
    }
    CoeffSeq::new(out)
}

/// Single coefficient `a_k(r) = (k+1)...(k+r-1)/(r-1)!`; zero for `k < 0`.
pub fn inv_pow_coeff(r: usize, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    rising(k + 1, r as u64 - 1) / factorial(r as u64 - 1)
}

fn check_order(r: usize, n: usize) -> Result<()> {
    if r == 0 || n == 0 || n > r {
        return Err(PfError::ParameterOutOfRange(format!("need 1 <= n <= r, got n = {n}, r = {r}")));
    }
    Ok(())
}

/// Closed form of the contiguous minor `det ||a_{k+j-i}(r)||_{i,j=1..n}`:
/// `prod_{i=1..n} (i-1)!/(r-i)! * (k+i)...(k+i+r-n-1)`.
pub fn lemma1_closed_form(r: usize, n: usize, k: usize) -> Result<Rational> {
    check_order(r, n)?;
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 1..=n {
        num *= factorial(i as u64 - 1) * rising((k + i) as i64, (r - n) as u64);
        den *= factorial((r - i) as u64);
    }
    Ok(Rational::new(num, den))
}

/// Closed form of `S_0^p(k,n)`, the contiguous minor of order `n` of the
/// `p`-th derivative of `1/(1-z)^{r^2}`.
pub fn s0_closed_form(r: usize, p: usize, n: usize, k: usize) -> Result<Rational> {
    check_order(r, n)?;
    let (num, den) = s0_parts(r, p, n, k);
    Ok(Rational::new(num, den))
}

/// Numerator and denominator of `S_0^p(k,n)` before reduction.
fn s0_parts(r: usize, p: usize, n: usize, k: usize) -> (BigInt, BigInt) {
    let big_r = r * r + p;
    let lead = num_traits::pow(rising((r * r) as i64, p as u64), n);
    let mut num = lead;
    let mut den = BigInt::one();
    for i in 1..=n {
        num *= factorial(i as u64 - 1) * rising((k + i) as i64, (big_r - n) as u64);
        den *= factorial((big_r - i) as u64);
    }
    (num, den)
}

/// The constant `M` with `S_0^p(k,n) >= M (k+1)^{n(r^2+p-n)}` for all `k >= 0`:
/// every linear factor `k+c` with `c >= 1` is at least `k+1`.
pub fn s0_lower_constant(r: usize, p: usize, n: usize) -> Result<Rational> {
    check_order(r, n)?;
    let big_r = r * r + p;
    let mut num = num_traits::pow(rising((r * r) as i64, p as u64), n);
    let mut den = BigInt::one();
    for i in 1..=n {
        num *= factorial(i as u64 - 1);
        den *= factorial((big_r - i) as u64);
    }
    Ok(Rational::new(num, den))
}

/// Degree in `k` of `S_0^p(k,n)`.
pub fn s0_degree(r: usize, p: usize, n: usize) -> usize {
    n * (r * r + p - n)
}

/// Finite PF_inf generating function `e^{gamma z} prod (1+alpha z) / prod (1-beta z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfInfinitySpec {
    #[serde(with = "serde_str")]
    pub gamma: Rational,
    #[serde(with = "serde_str::vec")]
    pub alphas: Vec<Rational>,
    #[serde(with = "serde_str::vec")]
    pub betas: Vec<Rational>,
}

impl PfInfinitySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, q: &Rational| {
            PfError::ParameterOutOfRange(format!("{what} must be non-negative, got {q}"))
        };
        if self.gamma.is_negative() {
            return Err(bad("gamma", &self.gamma));
        }
        if let Some(a) = self.alphas.iter().find(|a| a.is_negative()) {
            return Err(bad("alpha", a));
        }
        if let Some(b) = self.betas.iter().find(|b| b.is_negative()) {
            return Err(bad("beta", b));
        }
        Ok(())
    }
}

/// Coefficients of `e^{eps z}`: `eps^m / m!` for `m = 0..=w`.
pub fn exp_coeffs(eps: &Rational, w: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(w + 1);
    let mut term = Rational::one();
    for m in 0..=w {
        if m > 0 {
            term = term * eps / Rational::from_integer(BigInt::from(m));
        }
        out.push(term.clone());
    }
    out
}

/// Truncated coefficients of a finite PF_inf product.
pub fn pf_infinity_sample(spec: &PfInfinitySpec, w: usize) -> Result<CoeffSeq> {
    spec.validate()?;
    let mut c = exp_coeffs(&spec.gamma, w);
    for alpha in &spec.alphas {
        // multiply by 1 + alpha z
        for k in (1..=w).rev() {
            let prev = &c[k - 1] * alpha;
            c[k] += prev;
        }
    }
    for beta in &spec.betas {
        // divide by 1 - beta z: c_k += beta c_{k-1}, running forward
        for k in 1..=w {
            let prev = &c[k - 1] * beta;
            c[k] += prev;
        }
    }
    CoeffSeq::new(c)
}

/// `h(z) = sum_{k>=0} z^{k!}` truncated at `w`: `b_m` counts the `k` with `k! = m`.
pub fn lacunary_h(w: usize) -> CoeffSeq {
    let mut out = vec![Rational::zero(); w + 1];
    let mut f: usize = 1;
    let mut k: usize = 0;
    loop {
        if k > 0 {
            f = match f.checked_mul(k) {
                Some(v) => v,
                None => break,
            };
        }
        if f > w {
            break;
        }
        out[f] += Rational::one();
        k += 1;
    }
    CoeffSeq::new(out).expect("nonempty")
}

/// Coefficients of `g^{(p)}`: `b^p_k = (k+1)...(k+p) b_{k+p}` for `k = 0..=w`.
pub fn derived_series_coeffs(g: &CoeffSeq, p: usize, w: usize) -> Result<CoeffSeq> {
    if w + p > g.window() {
        return Err(PfError::IndexOutOfWindow { index: (w + p) as i64, window: g.window() });
    }
    let out = (0..=w)
        .map(|k| {
            let b = &g.coeffs()[k + p];
            if p == 0 || b.is_zero() {
                b.clone()
            } else {
                b * Rational::from_integer(rising(k as i64 + 1, p as u64))
            }
        })
        .collect();
    CoeffSeq::new(out)
}
